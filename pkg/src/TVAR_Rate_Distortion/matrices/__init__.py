"""Band matrices of the TVAR source: A, the inverse covariance and the covariance."""
