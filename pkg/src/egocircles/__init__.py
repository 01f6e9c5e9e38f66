"""Ego-network circle extraction and analysis for timeline data."""

__version__ = "0.1.0"
