"""Tail-modulo-cons transformation toolkit for the DataLang calculus."""

__version__ = "0.1.0"
