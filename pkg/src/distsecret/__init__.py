"""Distributed secret sharing over a public channel from correlated randomness."""

from .access import AccessStructure, ThresholdParams, all_or_nothing, monotone_closure, parse_access, threshold_structure
from .errors import GuardExceeded, KeyExhausted, SolverError, ValidationError
from .source import GroupSelector, JointSource, load_source, pairwise_key_source, sel

__version__ = "0.1.0"
