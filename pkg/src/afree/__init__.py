"""Potential operators for constant-rank operators, spectral solvers on the torus, and variational experiments."""

__version__ = "0.1.0"
