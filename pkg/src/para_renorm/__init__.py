"""Numerics and exact combinatorics for near-parabolic renormalization."""

__version__ = "0.1.0"
