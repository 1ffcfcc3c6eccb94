"""Exact certification of extremality and constant scalar curvature for
Sasaki structures on fiber joins."""

__version__ = "0.1.0"
