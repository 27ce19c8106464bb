"""Parsers for grid sequences and checkpoints."""
