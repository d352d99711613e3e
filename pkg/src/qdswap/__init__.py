"""Entanglement swapping between statistically distributed quantum-dot pair sources."""

__version__ = "0.1.0"
