"""bgtkit: Bernoulli group testing simulator and landscape numerics."""

__version__ = "0.1.0"
