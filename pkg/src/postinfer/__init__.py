"""Postcondition inference for heap-manipulating methods by evolutionary search."""

__version__ = "0.1.0"
