"""resokit: pseudo-spectral space-time resonance toolkit for 2D quadratic NLS."""

__version__ = "0.1.0"
