"""Exact computational toolkit for quiver Hecke-Clifford superalgebras."""

__version__ = "0.1.0"
