"""Decorated trees, words and arborification for NLS and wave iterated integrals."""

__version__ = "0.1.0"
