"""Verification of mobile-robot protocols on parameterized rings."""

from ._ringverify import (
    BudgetExceeded,
    Error,
    Protocol,
    SolverError,
    UsageError,
    WitnessError,
    check,
    crosscheck,
    evaluate,
    find_violation,
    normalize,
    post,
    post_star,
    revert,
    safety_smt,
    to_smtlib,
    verify,
    view,
)

__all__ = [
    "BudgetExceeded",
    "Error",
    "Protocol",
    "SolverError",
    "UsageError",
    "WitnessError",
    "check",
    "crosscheck",
    "evaluate",
    "find_violation",
    "normalize",
    "post",
    "post_star",
    "revert",
    "safety_smt",
    "to_smtlib",
    "verify",
    "view",
]
