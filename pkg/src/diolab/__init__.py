"""Exact computations around epsilon-badly approximable numbers and circle rotations."""

__version__ = "0.1.0"
