"""Formula AST for the temporal logic dialect.

Formulas are immutable and hashable, so structural equality works and
evaluators can memoize per-node results.  Temporal windows are relative
offsets in seconds; ``b = inf`` encodes an unbounded upper end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import DomainError
from ..expr import expr_to_str, format_number

COMPARISONS = ("<=", ">=", "<", ">")


@dataclass(frozen=True)
class Predicate:
    """Comparison between two arithmetic expressions over trace signals."""

    op: str
    lhs: object
    rhs: object

    def __post_init__(self):
        if self.op not in COMPARISONS:
            raise DomainError(f"unsupported comparison {self.op!r}")


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class And:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Or:
    lhs: object
    rhs: object


def _check_window(a, b):
    if not 0.0 <= a <= b:
        raise DomainError(f"temporal window must satisfy 0 <= a <= b, got [{a}, {b}]")


@dataclass(frozen=True)
class Ev:
    """Eventually within [t+a, t+b]."""

    a: float
    b: float
    arg: object

    def __post_init__(self):
        _check_window(self.a, self.b)


@dataclass(frozen=True)
class Alw:
    """Always within [t+a, t+b]."""

    a: float
    b: float
    arg: object

    def __post_init__(self):
        _check_window(self.a, self.b)


def conjuncts(formula):
    """Flatten nested conjunctions into a list (left to right)."""
    if isinstance(formula, And):
        return conjuncts(formula.lhs) + conjuncts(formula.rhs)
    return [formula]


def format_formula(f) -> str:
    """Canonical concrete syntax; ``parse(format_formula(f))`` equals ``f``."""
    if isinstance(f, Predicate):
        return f"{expr_to_str(f.lhs)} {f.op} {expr_to_str(f.rhs)}"
    if isinstance(f, Not):
        return f"not ({format_formula(f.arg)})"
    if isinstance(f, And):
        return f"({format_formula(f.lhs)}) and ({format_formula(f.rhs)})"
    if isinstance(f, Or):
        return f"({format_formula(f.lhs)}) or ({format_formula(f.rhs)})"
    if isinstance(f, (Ev, Alw)):
        word = "ev" if isinstance(f, Ev) else "alw"
        if f.a == 0.0 and math.isinf(f.b):
            return f"{word} ({format_formula(f.arg)})"
        return (
            f"{word}_[{format_number(f.a)}, {format_number(f.b)}]"
            f" ({format_formula(f.arg)})"
        )
    raise TypeError(f"not a formula node: {f!r}")
