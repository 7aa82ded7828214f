"""Systemic risk in dynamical bank-asset networks."""
__version__ = "0.1.0"
