"""Design and verification tools for elastic-band self-folding structures."""

__version__ = "0.1.0"
