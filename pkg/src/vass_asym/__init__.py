"""Exact asymptotic complexity analysis and Monte Carlo validation for VASS MDPs.

The analysis layer works entirely in exact rational arithmetic
(`fractions.Fraction`); floating point appears only in the simulator's
statistics and never in a classification decision.
"""

__version__ = "0.1.0"
