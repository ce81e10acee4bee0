"""Numerical toolkit for warped-product submanifold geometry."""

__version__ = "0.1.0"
