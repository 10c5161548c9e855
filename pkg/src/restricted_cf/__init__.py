"""Finite continued fractions with restricted digits: counting, spectra, asymptotics."""

__version__ = "0.1.0"
