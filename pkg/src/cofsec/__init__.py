"""Secure compute-and-forward rates for the Gaussian broadcast channel with helpers."""
