"""Mean first-passage times of the purity diffusion and their scaling with inefficiency."""
