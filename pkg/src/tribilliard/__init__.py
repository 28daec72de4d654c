"""Finite, checkable ingredients of sub-exponential complexity bounds for triangle billiards."""

__version__ = "0.1.0"
