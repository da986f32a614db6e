"""Born-rule probabilities from flea-perturbed double wells by the method of arbitrary functions."""
__version__ = "0.1.0"
