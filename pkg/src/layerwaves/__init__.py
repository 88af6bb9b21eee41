"""Elastic plane-wave scattering, ray tracing and travel-time inversion in
flat layered isotropic media."""

__version__ = "0.1.0"
