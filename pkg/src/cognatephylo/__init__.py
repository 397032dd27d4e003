"""Cognate detection, Bayesian tree inference and quartet-distance evaluation
for multilingual wordlists."""

__version__ = "0.1.0"
