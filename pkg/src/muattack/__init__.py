"""Security impact of mean-photon-number inflation on weak-coherent-pulse QKD."""

__version__ = "0.1.0"
