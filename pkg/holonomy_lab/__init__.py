"""Holonomy Lab - numerical holonomic quantum computation."""

__version__ = "0.1.0"
