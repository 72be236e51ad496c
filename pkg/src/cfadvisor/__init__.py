"""Counterfactual decision support for tabular performance data."""

__version__ = "0.1.0"
