"""Numerical verification of the generalized Newton-Leibniz identity on
n-rectangles and of the explicit Holder-embedding estimates for Sobolev
functions with dominating mixed smoothness."""

__version__ = "0.1.0"
