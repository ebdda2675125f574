"""Finite-volume spectral localizer for 1-D chiral and 2-D Chern lattice models."""

__version__ = "0.1.0"
