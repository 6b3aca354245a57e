"""Concurrent-code pulse-position modem simulator."""

__version__ = "0.1.0"
