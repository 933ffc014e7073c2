"""Toolkit for MILP models in LP text format: injection, repair, pruning, evaluation."""

__version__ = "0.1.0"
