"""Numerical checks for Maslov indices, Dehn twists on T*S^2 and Lagrangian surgery."""

__version__ = "0.1.0"
