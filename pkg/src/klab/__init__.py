"""Certified symbolic computations for homogeneous Poisson geometry."""

__version__ = "0.1.0"
