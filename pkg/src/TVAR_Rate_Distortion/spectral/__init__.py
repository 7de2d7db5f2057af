"""Eigenvalues of the inverse covariance and the eigenvalue-distribution checks."""
