"""qudeval: evaluation toolkit for QUD dependency parses."""

__version__ = "0.1.0"
