"""Rearrangements, Hardy-type kernel operators, r.i. norms and optimal targets on (0, 1)."""

__version__ = "0.1.0"
