"""Exact, semiclassical and dynamical analysis of the truncated attractive Bose gas on a ring."""

__version__ = "0.1.0"
