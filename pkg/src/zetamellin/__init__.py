"""Numerical laboratory for critical-line zeta moments and their Mellin transforms."""

__version__ = "0.1.0"
