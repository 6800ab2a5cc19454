"""Small-divisor linearization laboratory."""

__version__ = "0.1.0"
