"""Simulation and diagnostics for threshold crossings of minorized Markov walks."""

__version__ = "0.1.0"
