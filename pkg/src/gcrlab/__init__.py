"""Numerical laboratory for the Gauss-Codazzi-Ricci system of isometric embedding."""

__version__ = "0.1.0"
