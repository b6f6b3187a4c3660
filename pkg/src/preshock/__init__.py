"""Numerical laboratory for gradient blowup of azimuthal compressible Euler flow."""

__version__ = "0.1.0"
