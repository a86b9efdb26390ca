"""Exact updates, quadrature averages and the SDE cross-check."""
