"""Command-line front end for Lie-group controllability, Cartan and geodesic analyses."""

__version__ = "0.1.0"
