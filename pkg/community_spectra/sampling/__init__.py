"""Graph sampling and empirical spectra."""
