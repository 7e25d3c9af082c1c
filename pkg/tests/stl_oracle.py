"""Independent brute-force evaluator used as the oracle for STL semantics.

Works purely over sample indices: temporal windows are resolved to the set
of sample times they contain, so it is exact whenever window bounds align
with the sample grid (the generators guarantee that).  Deliberately written
as naive recursion with no sharing so it cannot inherit bugs from the
implementation under test.
"""

import math

import numpy as np

from ferrostat.expr import Abs, Bin, Const, Deriv, Name, Neg, Signal, SignalAt
from ferrostat.stl.nodes import Alw, And, Ev, Not, Or, Predicate


def eval_expr(node, trace, params, i):
    if isinstance(node, Const):
        return np.float64(node.value)
    if isinstance(node, Name):
        return np.float64(params[node.name])
    if isinstance(node, Signal):
        return np.float64(trace.column(node.name)[i])
    if isinstance(node, Deriv):
        return np.float64(trace.deriv_column(node.name)[i])
    if isinstance(node, SignalAt):
        return np.float64(np.interp(node.at, trace.times, trace.column(node.name)))
    if isinstance(node, Neg):
        return -eval_expr(node.arg, trace, params, i)
    if isinstance(node, Abs):
        return np.abs(eval_expr(node.arg, trace, params, i))
    if isinstance(node, Bin):
        a = eval_expr(node.lhs, trace, params, i)
        b = eval_expr(node.rhs, trace, params, i)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            return a / b
    raise TypeError(node)


def margin(pred, trace, params, i):
    raw = eval_expr(pred.rhs, trace, params, i) - eval_expr(pred.lhs, trace, params, i)
    if pred.op in (">", ">="):
        raw = -raw
    return -math.inf if np.isnan(raw) else float(raw)


def _window_indices(trace, i, a, b):
    lo = trace.times[i] + a
    hi = min(trace.times[i] + b, trace.times[-1])
    return [j for j, tj in enumerate(trace.times) if lo <= tj <= hi]


def oracle_bool(f, trace, params, i):
    if isinstance(f, Predicate):
        m = margin(f, trace, params, i)
        return m >= 0.0 if f.op in ("<=", ">=") else m > 0.0
    if isinstance(f, Not):
        return not oracle_bool(f.arg, trace, params, i)
    if isinstance(f, And):
        return oracle_bool(f.lhs, trace, params, i) and oracle_bool(f.rhs, trace, params, i)
    if isinstance(f, Or):
        return oracle_bool(f.lhs, trace, params, i) or oracle_bool(f.rhs, trace, params, i)
    if isinstance(f, Ev):
        return any(oracle_bool(f.arg, trace, params, j) for j in _window_indices(trace, i, f.a, f.b))
    if isinstance(f, Alw):
        return all(oracle_bool(f.arg, trace, params, j) for j in _window_indices(trace, i, f.a, f.b))
    raise TypeError(f)


def oracle_rob(f, trace, params, i):
    if isinstance(f, Predicate):
        return margin(f, trace, params, i)
    if isinstance(f, Not):
        return -oracle_rob(f.arg, trace, params, i)
    if isinstance(f, And):
        return min(oracle_rob(f.lhs, trace, params, i), oracle_rob(f.rhs, trace, params, i))
    if isinstance(f, Or):
        return max(oracle_rob(f.lhs, trace, params, i), oracle_rob(f.rhs, trace, params, i))
    if isinstance(f, Ev):
        vals = [oracle_rob(f.arg, trace, params, j) for j in _window_indices(trace, i, f.a, f.b)]
        return max(vals) if vals else -math.inf
    if isinstance(f, Alw):
        vals = [oracle_rob(f.arg, trace, params, j) for j in _window_indices(trace, i, f.a, f.b)]
        return min(vals) if vals else math.inf
    raise TypeError(f)
