"""Rain-aware sensing and resource allocation for multi-shell LEO satellite networks."""

__version__ = "0.1.0"
