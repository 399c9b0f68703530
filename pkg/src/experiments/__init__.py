"""Experiments module for replicates, sweeps, calibration and scenario matrices."""
