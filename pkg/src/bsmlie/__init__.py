"""Symmetry, invariant-solution and finite-difference verification for the
Black-Scholes-Merton equation with stochastic volatility."""

__version__ = "0.1.0"
