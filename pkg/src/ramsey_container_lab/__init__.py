"""Exact and Monte Carlo tools for Ramsey, Rado and container computations."""

__version__ = "0.1.0"
