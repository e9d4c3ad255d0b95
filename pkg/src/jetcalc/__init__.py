"""Chart-level jet calculus with a numerical verification harness.

The package computes exact truncated-series covariant derivatives on single
charts, builds the submersion geometry of a vector bundle's total space,
constructs the recursive coefficient families that exchange derivatives
across lifts, connection changes, and pull-backs, and certifies the
associated norm estimates and seminorm comparisons at desk scale.
"""

__version__ = "0.1.0"
