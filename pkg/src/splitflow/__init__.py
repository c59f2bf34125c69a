"""Spectral flow splitting for one-dimensional Dirac-type operators."""
__version__ = "0.1.0"
