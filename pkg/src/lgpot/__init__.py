"""Exact proper Landau-Ginzburg potentials, theta functions and two-point invariants."""

__version__ = "0.1.0"
