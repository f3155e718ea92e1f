"""Numerical laboratory for lattice interfaces, Loewner driving functions and SLE diagnostics."""

__version__ = "0.1.0"
