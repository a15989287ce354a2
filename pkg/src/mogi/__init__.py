"""Multi-objective genetic improvement over a small instrumented language."""

__version__ = "0.1.0"
