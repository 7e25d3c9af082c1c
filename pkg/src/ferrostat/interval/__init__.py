"""Interval arithmetic, the HC4 contractor, and the iron constraint system."""

from ..expr import Constraint, parse_constraint
from .box import Box
from .contract import hc4_revise, propagate
from .core import EMPTY, WHOLE, Interval, add, div, mul, sub
from .iron import (
    PUBLISHED_DEDUCTIONS,
    build_iron_constraints,
    contraction_report,
    format_box_file,
    parse_box_file,
    parse_constraint_file,
)

__all__ = [
    "Box",
    "Constraint",
    "EMPTY",
    "Interval",
    "PUBLISHED_DEDUCTIONS",
    "WHOLE",
    "add",
    "build_iron_constraints",
    "contraction_report",
    "div",
    "format_box_file",
    "hc4_revise",
    "mul",
    "parse_box_file",
    "parse_constraint",
    "parse_constraint_file",
    "propagate",
    "sub",
]
