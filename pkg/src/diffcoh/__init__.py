"""Exact laboratory for graded differential operators and symmetric-power cohomology."""

__version__ = "0.1.0"
