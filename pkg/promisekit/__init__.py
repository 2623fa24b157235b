"""Promise-graph modelling, static analysis and trust simulation."""

__version__ = "0.1.0"
