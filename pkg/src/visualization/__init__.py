"""Visualization module for at-risk trajectory charts."""
