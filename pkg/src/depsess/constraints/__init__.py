"""Linear integer/boolean entailment with an exhaustive oracle for testing."""

from .kernel import BACKEND
from .solver import (
    ConstraintStore,
    Invalid,
    Unsupported,
    Valid,
    Verdict,
    entails,
    evaluate,
    falsifies,
    oracle_entails,
)

__all__ = [
    "BACKEND",
    "ConstraintStore",
    "Invalid",
    "Unsupported",
    "Valid",
    "Verdict",
    "entails",
    "evaluate",
    "falsifies",
    "oracle_entails",
]
