"""Exporters for grids, checkpoints, reports and plots."""
