"""Radial Schrodinger origin analysis."""
