"""Mutual information and context-free independence in parse-tree corpora."""
__version__ = "0.1.0"
