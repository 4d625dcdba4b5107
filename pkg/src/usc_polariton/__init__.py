"""Open-system dynamics of ultrastrongly coupled cavity polaritons."""

__version__ = "0.1.0"
