"""Exact Novikov-series superpotentials, wall-crossing checks and G2 model numerics."""

__version__ = "0.1.0"
