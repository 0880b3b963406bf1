"""Determinantal point processes from random matrix-valued analytic functions."""
__version__ = "0.1.0"
