"""Exact Diophantine tools and orbit experiments for four-point time-frequency configurations."""

__version__ = "0.1.0"
