"""Bitstring sampling commands."""
