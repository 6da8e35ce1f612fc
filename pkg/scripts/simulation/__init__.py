"""Circuit construction and gate application commands."""
