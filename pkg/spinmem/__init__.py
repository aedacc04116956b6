"""Moment-equation simulation of a spin-ensemble quantum memory for microwave fields."""

__version__ = "0.1.0"
