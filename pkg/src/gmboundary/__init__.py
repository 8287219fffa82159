"""Exact arithmetic and random walks on graph-manifold groups and their Bass-Serre trees."""

__version__ = "0.1.0"
