"""Cross-platform displayed-persona profiling toolkit."""

__version__ = "0.1.0"
