"""Environment module for building grid worlds from rasters."""
