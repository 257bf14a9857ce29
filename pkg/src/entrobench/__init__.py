"""Exact desk-scale workbench for entropy-pair and shadowing constructions."""

__version__ = "0.1.0"
