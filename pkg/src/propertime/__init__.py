"""Proper time and rest mass as conjugate quantum operators: lattice simulator and checks."""

__version__ = "0.1.0"
