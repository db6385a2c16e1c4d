"""Spectral numerics for linear inviscid damping in a channel."""

__version__ = "0.1.0"
