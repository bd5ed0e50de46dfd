"""Weak partial orders, weak topological orders and deterministic parallel fixpoints."""

__version__ = "0.1.0"
