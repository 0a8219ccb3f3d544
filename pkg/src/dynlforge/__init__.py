"""Dynamical l-matrices of Lie quasi-bialgebras: closed forms, residual suites and duality."""

__version__ = "0.1.0"
