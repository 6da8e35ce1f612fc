"""Lattice construction commands."""
