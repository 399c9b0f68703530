"""Pollution module for ingesting, imputing and projecting PM10 series."""
