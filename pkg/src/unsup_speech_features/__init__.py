"""Unsupervised speech feature learning from discovered word pairs."""
