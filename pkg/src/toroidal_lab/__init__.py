"""Numerics for flat line bundles on toroidal groups C*^2/<σ>: Diophantine
classification, small-divisor equations and a weighted dbar round trip."""

__version__ = "0.1.0"
