"""Hawkes models of event activity around scheduled news."""

__version__ = "0.1.0"
