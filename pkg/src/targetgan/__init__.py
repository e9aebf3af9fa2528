"""Target-conditioned two-stage graph transformer GAN for de novo molecule design."""

__version__ = "0.1.0"
