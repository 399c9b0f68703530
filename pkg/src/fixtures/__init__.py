"""Fixtures module for generating synthetic input data."""
