"""Computational twin of a precision sphere-plate Casimir-force measurement:
zero-parameter theory engine, exact electrostatics, and the force-curve
calibration/fitting/statistics pipeline."""

__version__ = "0.1.0"
