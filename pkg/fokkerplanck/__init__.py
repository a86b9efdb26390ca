"""Fokker-Planck equation for the purity of an isotropically measured qubit."""
