"""Finite classical polar spaces, their Weyl-distance and incidence graphs,
round-up configuration analysis, and graph-to-building reconstruction."""

__version__ = "0.1.0"
