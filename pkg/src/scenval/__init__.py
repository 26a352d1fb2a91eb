"""Statistical validation of time-series scenario sets."""

__version__ = "0.1.0"
