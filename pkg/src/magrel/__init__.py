"""Lattice laboratory for magnetic relativistic Schrodinger operators."""

__version__ = "0.1.0"
