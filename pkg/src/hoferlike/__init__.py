"""Hofer-like geometry toolkit for symplectic isotopies of the flat 2-torus."""

__version__ = "0.1.0"
