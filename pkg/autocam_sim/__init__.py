"""Physically based camera simulation for automotive scenes."""

__version__ = "0.1.0"
