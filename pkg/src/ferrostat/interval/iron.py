"""Steady-state constraint system and search box of the iron case study.

The five stationarity equations (in the iron-replete regime, where the
regulation sigmoids are saturated), the measured parameter intervals, the
analogy-derived intervals for the unmeasured parameters, the iron-replete
variable intervals, and the consumption-dominates-export inequality.

Names follow the formula-facing convention (``k_Fe_cons``, ``theta_IRP_Ft``,
...); the box spans the twenty parameters, the five steady-state variables
and the pinned input ``Tf_sat``.
"""

from __future__ import annotations

import math

from ..expr import parse_constraint
from ..model import PARAM_INFO, PARAM_BOUNDS, VARIABLE_BOUNDS
from .box import Box
from .contract import propagate

_EQUATIONS = (
    "Tf_sat * k_Fe_input * TfR1 = (k_Fe_export * FPN1a + k_Fe_cons) * Fe",
    "k_IRP_prod = (k_IRP_deg + k_Fe_IRP) * IRP",
    "k_Ft_prod = k_Ft_deg * Ft",
    "k_FPN1a_prod = k_FPN1a_deg * FPN1a",
    "k_TfR1_prod + k_IRP_TfR1 * IRP = k_TfR1_deg * TfR1",
    "k_Fe_cons >= k_Fe_export * FPN1a",
)

#: The eight bound improvements the interval solver is expected to find:
#: (name, which bound, published value).  Matching is judged by direction
#: and order of magnitude, not digits.
PUBLISHED_DEDUCTIONS = (
    ("k_FPN1a_deg", "lo", 1.0e-13),
    ("k_FPN1a_prod", "hi", 9.6e-11),
    ("k_IRP_prod", "lo", 3.84e-14),
    ("k_Fe_cons", "hi", 3.39e-4),
    ("k_Fe_IRP", "hi", 3.33e-2),
    ("FPN1a", "lo", 1.04e-13),
    ("Fe", "lo", 3.5e-8),
    ("TfR1", "hi", 8.7e-8),
)


def build_iron_constraints(tf_sat: float = 0.3):
    """Return ``(constraints, initial_box)`` for the steady-state system."""
    intervals = {}
    for field, (lo, hi) in PARAM_BOUNDS.items():
        intervals[PARAM_INFO[field][2]] = (lo, hi)
    intervals.update(VARIABLE_BOUNDS)
    intervals["Tf_sat"] = (tf_sat, tf_sat)
    constraints = tuple(parse_constraint(text) for text in _EQUATIONS)
    return constraints, Box(intervals)


def contraction_report(
    tf_sat: float = 0.3,
    eps_improve: float = 1e-3,
    bisect_depth: int = 0,
) -> dict:
    """Propagate the iron system and compare against the published deductions.

    A deduction counts as matched when the corresponding bound moved in the
    published direction and ends within one order of magnitude of the
    published figure.
    """
    constraints, before = build_iron_constraints(tf_sat)
    after = propagate(constraints, before, eps_improve, bisect_depth=bisect_depth)

    dims = {}
    for name, iv0 in before:
        iv1 = after[name]
        dims[name] = {
            "before": [iv0.lo, iv0.hi],
            "after": [iv1.lo, iv1.hi],
        }

    deductions = []
    n_matched = 0
    for name, side, published in PUBLISHED_DEDUCTIONS:
        iv0, iv1 = before[name], after[name]
        if side == "lo":
            achieved = iv1.lo
            moved = achieved > iv0.lo
        else:
            achieved = iv1.hi
            moved = achieved < iv0.hi
        within = (
            achieved > 0.0
            and math.isfinite(achieved)
            and abs(math.log10(achieved / published)) <= 1.0
        )
        matched = bool(moved and within)
        n_matched += matched
        deductions.append(
            {
                "name": name,
                "bound": side,
                "published": published,
                "achieved": achieved,
                "moved": bool(moved),
                "matched": matched,
            }
        )

    return {
        "infeasible": after.is_empty,
        "dimensions": dims,
        "deductions": deductions,
        "n_matched": n_matched,
        "units": {
            "rates": "1/s or mol/L/s per parameter kind",
            "concentrations": "mol/L",
        },
    }


def parse_box_file(text: str) -> Box:
    """``name lo hi`` per line; ``inf``/``-inf`` accepted; ``#`` comments."""
    intervals = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'name lo hi'")
        name, lo, hi = parts
        intervals[name] = (float(lo), float(hi))
    return Box(intervals)


def format_box_file(box: Box) -> str:
    lines = [f"{name} {iv.lo!r} {iv.hi!r}" for name, iv in box]
    return "\n".join(lines) + "\n"


def parse_constraint_file(text: str):
    """One constraint per line, ``#`` comments allowed."""
    constraints = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        constraints.append(parse_constraint(line))
    return tuple(constraints)
