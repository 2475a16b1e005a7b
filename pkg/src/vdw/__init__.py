"""Certificates and lower bounds for van der Waerden numbers."""

__version__ = "0.1.0"
