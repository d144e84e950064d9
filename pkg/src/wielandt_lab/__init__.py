"""Numerical laboratory for operator Wielandt-type inequalities at finite matrix scale."""

__version__ = "0.1.0"
