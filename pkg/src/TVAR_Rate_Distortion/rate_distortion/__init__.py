"""Finite-N and asymptotic rate-distortion curves."""
