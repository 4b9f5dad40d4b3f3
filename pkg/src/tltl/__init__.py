"""LTL with synchronous team semantics and Boolean negation."""

__version__ = "0.1.0"
