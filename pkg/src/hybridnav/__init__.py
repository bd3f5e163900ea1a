"""Hybrid global/reactive navigation for ground and aerial robots near dynamic hazards."""

__version__ = "0.1.0"
