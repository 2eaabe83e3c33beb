"""Examples for Gaussian Locality."""
