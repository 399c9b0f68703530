"""Dynamics module for the tick loop and health model."""
