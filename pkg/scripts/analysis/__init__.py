"""Expectation values and BP error reports."""
