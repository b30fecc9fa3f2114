"""Exact probability on finite orthomodular lattices."""

from .errors import OmlprobError

__version__ = "0.1.0"

__all__ = ["OmlprobError", "__version__"]
