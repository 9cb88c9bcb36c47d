"""Numerical laboratory for planar maps of generalized finite distortion."""

__version__ = "0.1.0"
