"""Tests for Gaussian Locality."""
