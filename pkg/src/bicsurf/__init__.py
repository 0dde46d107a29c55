"""Comparison geometry for surfaces of bounded integral curvature."""

__version__ = "0.1.0"
