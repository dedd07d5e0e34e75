"""Command-line front end for Holonomy Lab."""
