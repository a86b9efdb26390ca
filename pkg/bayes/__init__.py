"""Finite-time Bayesian (POVM) updates for a measurement along z."""
