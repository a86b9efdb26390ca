"""Stepping kernels, noise streams and ensemble execution."""
