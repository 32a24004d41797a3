"""Multi-armed bandit simulation with spectral (filter-view) instrumentation."""

__version__ = "0.1.0"
