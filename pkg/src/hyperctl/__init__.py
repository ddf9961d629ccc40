"""Identification and parsimonious control of noisy dynamics on directed hypergraphs."""

__version__ = "0.1.0"
