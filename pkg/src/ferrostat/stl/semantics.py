"""Boolean satisfaction and quantitative robustness over sampled traces.

Semantics: predicate expressions are evaluated at every trace sample and
linearly interpolated in between, so each predicate has a piecewise-linear
margin signal (rhs - lhs, signed by the comparison direction).  Boolean
operators combine pointwise; ``ev_[a,b]``/``alw_[a,b]`` take the sup/inf of
the operand over the window [t+a, min(t+b, trace end)], computed over all
samples inside the window plus the interpolated window endpoints.  For a
piecewise-linear operand this is the exact window extremum.

Degenerate windows (a == b) are evaluated by direct recursion at t+a, so
``ev_[a,a] phi`` equals phi at t+a exactly.

Robustness is a signed margin: positive implies boolean truth, negative
implies falsity (ties at exactly 0 are resolved by the comparison's
strictness).  Negation negates robustness exactly, so the ev/alw duality
holds to the last bit.  Where a predicate's expression is undefined (0/0),
its margin is -inf, i.e. an undefined predicate is falsified.
"""

from __future__ import annotations

from collections import deque

import math

import numpy as np

from ..errors import DomainError, UnboundNameError
from ..expr import Abs, Bin, Const, Deriv, Name, Neg, Signal, SignalAt
from .nodes import Alw, And, Ev, Not, Or, Predicate

_NONSTRICT = ("<=", ">=")


class EvalEnvironment:
    """A trace plus parameter bindings against which formulas are evaluated.

    ``truncate`` controls what happens when a window reaches past the end of
    the trace: by default it is clipped (sup/inf over what exists, an empty
    window giving -inf/+inf); in strict mode a finite window that does not
    fit raises :class:`DomainError`.
    """

    def __init__(self, trace, params=None, truncate: bool = True):
        self.trace = trace
        self.params = dict(params or {})
        self.truncate = truncate
        self._series = {}
        self._margin = {}
        self._rob = {}
        self._bool = {}

    # -- expression evaluation over the whole sample grid ------------------

    def series(self, node) -> np.ndarray | float:
        key = node
        hit = self._series.get(key)
        if hit is None:
            hit = self._series[key] = self._eval_series(node)
        return hit

    def _eval_series(self, node):
        trace = self.trace
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Name):
            try:
                return float(self.params[node.name])
            except KeyError:
                raise UnboundNameError(
                    f"name {node.name!r} is not bound in the environment"
                ) from None
        if isinstance(node, Signal):
            self._need_var(node.name)
            return trace.column(node.name)
        if isinstance(node, Deriv):
            self._need_var(node.name)
            return trace.deriv_column(node.name)
        if isinstance(node, SignalAt):
            self._need_var(node.name)
            return trace.value_at(node.name, node.at)
        if isinstance(node, Neg):
            return -self.series(node.arg)
        if isinstance(node, Abs):
            return np.abs(self.series(node.arg))
        if isinstance(node, Bin):
            a = self.series(node.lhs)
            b = self.series(node.rhs)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                if node.op == "+":
                    return a + b
                if node.op == "-":
                    return a - b
                if node.op == "*":
                    return a * b
                return a / b
        raise TypeError(f"not an expression node: {node!r}")

    def _need_var(self, name):
        if not self.trace.has_variable(name):
            raise UnboundNameError(f"trace has no variable {name!r}")

    # -- per-node signals ---------------------------------------------------

    def margin(self, pred: Predicate) -> np.ndarray:
        hit = self._margin.get(pred)
        if hit is None:
            raw = self.series(pred.rhs) - self.series(pred.lhs)
            if pred.op in (">", ">="):
                raw = -raw
            raw = np.broadcast_to(np.asarray(raw, dtype=float), self.trace.times.shape)
            hit = np.where(np.isnan(raw), -np.inf, raw)
            self._margin[pred] = hit
        return hit

    def rob_signal(self, f) -> np.ndarray:
        hit = self._rob.get(f)
        if hit is None:
            hit = self._rob[f] = self._compute_rob_signal(f)
        return hit

    def _compute_rob_signal(self, f):
        if isinstance(f, Predicate):
            return self.margin(f)
        if isinstance(f, Not):
            return -self.rob_signal(f.arg)
        if isinstance(f, And):
            return np.minimum(self.rob_signal(f.lhs), self.rob_signal(f.rhs))
        if isinstance(f, Or):
            return np.maximum(self.rob_signal(f.lhs), self.rob_signal(f.rhs))
        if isinstance(f, (Ev, Alw)):
            want_max = isinstance(f, Ev)
            if f.a == f.b:
                end = self.trace.t_end
                return np.array(
                    [
                        self._rob_at(f.arg, t + f.a, inside=True)
                        if t + f.a <= end
                        else self._empty_window(f, t + f.a)
                        for t in self.trace.times
                    ]
                )
            child = self.rob_signal(f.arg)
            return _window_signal(self.trace.times, child, f.a, f.b, want_max, self.truncate)
        raise TypeError(f"not a formula node: {f!r}")

    def bool_signal(self, f) -> np.ndarray:
        hit = self._bool.get(f)
        if hit is None:
            hit = self._bool[f] = self._compute_bool_signal(f)
        return hit

    def _compute_bool_signal(self, f):
        if isinstance(f, Predicate):
            m = self.margin(f)
            return m >= 0.0 if f.op in _NONSTRICT else m > 0.0
        if isinstance(f, Not):
            return ~self.bool_signal(f.arg)
        if isinstance(f, And):
            return self.bool_signal(f.lhs) & self.bool_signal(f.rhs)
        if isinstance(f, Or):
            return self.bool_signal(f.lhs) | self.bool_signal(f.rhs)
        if isinstance(f, (Ev, Alw)):
            want_any = isinstance(f, Ev)
            times = self.trace.times
            if f.a == f.b:
                end = self.trace.t_end
                return np.array(
                    [
                        self._bool_at(f.arg, t + f.a, inside=True)
                        if t + f.a <= end
                        else self._empty_window(f, t + f.a) > 0
                        for t in times
                    ]
                )
            child_bool = self.bool_signal(f.arg).astype(float)
            child_rob = self.rob_signal(f.arg)
            sample_part = _window_signal(
                times, child_bool, f.a, f.b, want_any, self.truncate,
                endpoints=False,
            )
            end_part = _window_endpoint_bools(
                times, child_rob, f.a, f.b, self._endpoint_strict(f.arg), want_any
            )
            if want_any:
                return (sample_part > 0.0) | end_part
            return (sample_part > 0.0) & end_part
        raise TypeError(f"not a formula node: {f!r}")

    @staticmethod
    def _endpoint_strict(child) -> bool:
        # Between samples, predicate truth follows its own strictness on the
        # interpolated margin; composite operands count only strictly
        # positive interpolated robustness as true.
        if isinstance(child, Predicate):
            return child.op not in _NONSTRICT
        return True

    # -- point evaluation ----------------------------------------------------

    def _check_t(self, t):
        if not (self.trace.t_start <= t <= self.trace.t_end):
            raise DomainError(
                f"evaluation time {t} outside trace domain "
                f"[{self.trace.t_start}, {self.trace.t_end}]"
            )

    def _rob_at(self, f, t, inside=False):
        if not inside:
            self._check_t(t)
        times = self.trace.times
        if isinstance(f, Predicate):
            if t > self.trace.t_end:
                return -math.inf
            return float(_interp(times, self.margin(f), t))
        if isinstance(f, Not):
            return -self._rob_at(f.arg, t, inside=True)
        if isinstance(f, And):
            return min(self._rob_at(f.lhs, t, inside=True), self._rob_at(f.rhs, t, inside=True))
        if isinstance(f, Or):
            return max(self._rob_at(f.lhs, t, inside=True), self._rob_at(f.rhs, t, inside=True))
        if isinstance(f, (Ev, Alw)):
            want_max = isinstance(f, Ev)
            if f.a == f.b:
                lo = t + f.a
                if lo > self.trace.t_end:
                    return self._empty_window(f, lo)
                return self._rob_at(f.arg, lo, inside=True)
            lo, hi = self._window(f, t)
            if lo is None:
                return -math.inf if want_max else math.inf
            child = self.rob_signal(f.arg)
            return _window_extremum(times, child, lo, hi, want_max)
        raise TypeError(f"not a formula node: {f!r}")

    def _bool_at(self, f, t, inside=False):
        if not inside:
            self._check_t(t)
        times = self.trace.times
        if isinstance(f, Predicate):
            if t > self.trace.t_end:
                return False
            m = float(_interp(times, self.margin(f), t))
            return m >= 0.0 if f.op in _NONSTRICT else m > 0.0
        if isinstance(f, Not):
            return not self._bool_at(f.arg, t, inside=True)
        if isinstance(f, And):
            return self._bool_at(f.lhs, t, inside=True) and self._bool_at(f.rhs, t, inside=True)
        if isinstance(f, Or):
            return self._bool_at(f.lhs, t, inside=True) or self._bool_at(f.rhs, t, inside=True)
        if isinstance(f, (Ev, Alw)):
            want_any = isinstance(f, Ev)
            if f.a == f.b:
                lo = t + f.a
                if lo > self.trace.t_end:
                    return self._empty_window(f, lo) > 0
                return self._bool_at(f.arg, lo, inside=True)
            lo, hi = self._window(f, t)
            if lo is None:
                return not want_any
            li = int(np.searchsorted(times, lo, side="left"))
            ri = int(np.searchsorted(times, hi, side="right")) - 1
            child_bool = self.bool_signal(f.arg)
            sample_hit = bool(child_bool[li : ri + 1].any()) if li <= ri else False
            sample_all = bool(child_bool[li : ri + 1].all()) if li <= ri else True
            child_rob = self.rob_signal(f.arg)
            strict = self._endpoint_strict(f.arg)
            ends = []
            for point in (lo, hi):
                v = float(_interp(times, child_rob, point))
                ends.append(v > 0.0 if strict else v >= 0.0)
            if want_any:
                return sample_hit or ends[0] or ends[1]
            return sample_all and ends[0] and ends[1]
        raise TypeError(f"not a formula node: {f!r}")

    def _window(self, f, t):
        """Absolute window [lo, hi] at time t, or (None, None) if empty."""
        end = self.trace.t_end
        lo = t + f.a
        hi = t + f.b
        if hi > end:
            if not self.truncate and math.isfinite(f.b):
                raise DomainError(
                    f"window [{f.a}, {f.b}] at t = {t} exceeds the trace horizon"
                )
            hi = end
        if lo > hi:
            return None, None
        return lo, hi

    def _empty_window(self, f, lo):
        if not self.truncate:
            raise DomainError(f"window start {lo} exceeds the trace horizon")
        return -math.inf if isinstance(f, Ev) else math.inf


def _interp(times, values, t):
    v = np.interp(t, times, values)
    return -math.inf if np.isnan(v) else v


def _window_extremum(times, values, lo, hi, want_max):
    li = int(np.searchsorted(times, lo, side="left"))
    ri = int(np.searchsorted(times, hi, side="right")) - 1
    cands = [float(_interp(times, values, lo)), float(_interp(times, values, hi))]
    if li <= ri:
        seg = values[li : ri + 1]
        cands.append(float(seg.max() if want_max else seg.min()))
    return max(cands) if want_max else min(cands)


def _window_signal(times, values, a, b, want_max, truncate, endpoints=True):
    """Windowed sliding extremum of a sampled signal, at every sample time.

    out[i] = extremum of the piecewise-linear signal over
    [times[i]+a, min(times[i]+b, end)]; empty windows give -inf (max) or
    +inf (min).
    """
    n = len(times)
    end = times[-1]
    lo = times + a
    hi = np.minimum(times + b, end)
    if not truncate and math.isfinite(b) and (times + b > end).any():
        raise DomainError(f"window [{a}, {b}] exceeds the trace horizon somewhere")
    empty = lo > end

    sign = 1.0 if want_max else -1.0
    vals = sign * values
    out = np.full(n, -math.inf)

    dq: deque = deque()
    left = 0
    right = 0
    for i in range(n):
        if empty[i]:
            continue
        lo_i, hi_i = lo[i], hi[i]
        while right < n and times[right] <= hi_i:
            while dq and vals[dq[-1]] <= vals[right]:
                dq.pop()
            dq.append(right)
            right += 1
        while left < right and times[left] < lo_i:
            if dq and dq[0] == left:
                dq.popleft()
            left += 1
        if dq:
            out[i] = vals[dq[0]]

    if endpoints:
        lo_v = sign * np.interp(np.minimum(lo, end), times, values)
        hi_v = sign * np.interp(hi, times, values)
        lo_v = np.where(np.isnan(lo_v), -math.inf, lo_v)
        hi_v = np.where(np.isnan(hi_v), -math.inf, hi_v)
        out = np.maximum(out, np.maximum(lo_v, hi_v))

    out = np.where(empty, -math.inf, out)
    return sign * out


def _window_endpoint_bools(times, child_rob, a, b, strict, want_any):
    end = times[-1]
    lo = np.minimum(times + a, end)
    hi = np.minimum(times + b, end)
    empty = times + a > end
    lo_v = np.interp(lo, times, child_rob)
    hi_v = np.interp(hi, times, child_rob)
    lo_v = np.where(np.isnan(lo_v), -math.inf, lo_v)
    hi_v = np.where(np.isnan(hi_v), -math.inf, hi_v)
    if strict:
        lo_b, hi_b = lo_v > 0.0, hi_v > 0.0
    else:
        lo_b, hi_b = lo_v >= 0.0, hi_v >= 0.0
    res = (lo_b | hi_b) if want_any else (lo_b & hi_b)
    return np.where(empty, not want_any, res).astype(bool)


# --------------------------------------------------------------------------
# Public entry points


def robustness(formula, env: EvalEnvironment, t: float = 0.0) -> float:
    """Signed satisfaction margin of ``formula`` at time ``t``."""
    return env._rob_at(formula, t)


def eval_bool(formula, env: EvalEnvironment, t: float = 0.0) -> bool:
    """Boolean satisfaction of ``formula`` at time ``t``."""
    return env._bool_at(formula, t)
