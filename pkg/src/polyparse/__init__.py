"""Multilingual transition-based dependency parsing with configurable parameter sharing."""

__version__ = "0.1.0"
