"""Temporal logic parsing, boolean monitoring and quantitative robustness."""

from .iron import IronSpec, build_iron_spec
from .nodes import Alw, And, Ev, Not, Or, Predicate, conjuncts, format_formula
from .parser import format_formula_file, parse, parse_formula_file
from .semantics import EvalEnvironment, eval_bool, robustness

__all__ = [
    "Alw",
    "And",
    "Ev",
    "EvalEnvironment",
    "IronSpec",
    "Not",
    "Or",
    "Predicate",
    "build_iron_spec",
    "conjuncts",
    "eval_bool",
    "format_formula",
    "format_formula_file",
    "parse",
    "parse_formula_file",
    "robustness",
]
