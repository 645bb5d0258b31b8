"""Mod-2 symbolic engine for the Milnor coalgebra, its cobar construction and related operations."""

__version__ = "0.1.0"
