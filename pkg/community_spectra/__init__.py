"""Community Spectra - spectra of random graphs with community structure and arbitrary degrees."""

__version__ = "1.0.0"
