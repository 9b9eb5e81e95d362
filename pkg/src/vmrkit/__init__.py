"""Toolkit for verifiable multiple-choice reformulation of preference data.

Preference triples (query, chosen, rejected) become two-option instances
with seeded randomized option order, rollouts are scored by a rule-based
binary verifier, and the resulting rewards feed group-relative policy
optimization. A toy-policy lab validates the gradient estimators against
exact enumeration and finite differences.
"""

__version__ = "0.1.0"
