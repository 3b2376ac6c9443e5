"""Ramsey frequency estimation with atoms in local non-Markovian reservoirs."""

__version__ = "0.1.0"
