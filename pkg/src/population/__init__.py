"""Population module for synthesizing agents and their locations."""
