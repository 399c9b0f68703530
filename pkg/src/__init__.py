"""
PM10 Exposure ABM Toolkit
=========================

Agent-based simulation of cumulative PM10 exposure on a gridded urban
environment.

Modules:
    - pollution: Impute, aggregate and project station PM10 series
    - environment: Build grid worlds from land-cover and land-price rasters
    - population: Synthesize a sampled population with homes and workplaces
    - dynamics: Tick loop, health loss, recovery and hospitalization
    - experiments: Replicates, OFAT sweeps, calibration, scenario matrices
    - visualization: SVG charts of at-risk trajectories
    - fixtures: Synthetic two-district input data
"""

__version__ = "1.0.0"
__author__ = "Exposure Modelling Team"
