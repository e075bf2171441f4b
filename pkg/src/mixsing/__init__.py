"""Computational toolkit for mixed (z, z-bar) polynomial maps and their links."""

__version__ = "0.1.0"
