"""Output files: curve, path, spectrum and matrix tables, manifests and plots."""
