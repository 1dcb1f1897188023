"""Generalized number-phase lattice bosonic code simulator."""

__version__ = "0.1.0"
