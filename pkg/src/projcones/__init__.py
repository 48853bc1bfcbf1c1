"""Desk-scale experiments with restricted projections and cone intersections in R^3."""

__version__ = "0.1.0"
