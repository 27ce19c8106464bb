"""Minimal numpy convolutional network with manual backpropagation."""
