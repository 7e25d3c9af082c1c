"""Closed interval arithmetic with outward rounding.

Every operation returns an enclosure of the exact result set, inflated by
one ulp per endpoint where the float computation may round.  The empty
interval is a distinguished value (lo > hi) that propagates through all
operations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_INF = math.inf


def _down(x: float) -> float:
    # A float sum/difference that lands exactly on 0.0 is exact, so zero is
    # never inflated here; multiplication/division handle underflowed zeros
    # sign-aware via their candidate helpers before calling this.
    if math.isinf(x) or x != x or x == 0.0:
        return x
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    if math.isinf(x) or x != x or x == 0.0:
        return x
    return math.nextafter(x, _INF)

_TINY = 5e-324


def _cand_down(v: float, exact: bool, negative_underflow: bool) -> float:
    if exact:
        return v
    if v == 0.0:
        return -_TINY if negative_underflow else 0.0
    return _down(v)


def _cand_up(v: float, exact: bool, positive_underflow: bool) -> float:
    if exact:
        return v
    if v == 0.0:
        return _TINY if positive_underflow else 0.0
    return _up(v)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    @property
    def width(self) -> float:
        return 0.0 if self.is_empty else self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def is_subset_of(self, other: "Interval") -> bool:
        if self.is_empty:
            return True
        return other.lo <= self.lo and self.hi <= other.hi

    def intersect(self, other: "Interval") -> "Interval":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else EMPTY

    def hull(self, other: "Interval") -> "Interval":
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __str__(self):
        return "[]" if self.is_empty else f"[{self.lo:g}, {self.hi:g}]"


EMPTY = Interval(_INF, -_INF)
WHOLE = Interval(-_INF, _INF)


def point(x: float) -> Interval:
    return Interval(x, x)


def add(a: Interval, b: Interval) -> Interval:
    if a.is_empty or b.is_empty:
        return EMPTY
    return Interval(_down(a.lo + b.lo), _up(a.hi + b.hi))


def sub(a: Interval, b: Interval) -> Interval:
    if a.is_empty or b.is_empty:
        return EMPTY
    return Interval(_down(a.lo - b.hi), _up(a.hi - b.lo))


def neg(a: Interval) -> Interval:
    if a.is_empty:
        return EMPTY
    return Interval(-a.hi, -a.lo)


def mul(a: Interval, b: Interval) -> Interval:
    if a.is_empty or b.is_empty:
        return EMPTY
    los = []
    his = []
    for x in (a.lo, a.hi):
        for y in (b.lo, b.hi):
            # 0 * inf arises from endpoints like [0, inf); the exact set
            # product contributes 0 there, not nan.
            if x == 0.0 or y == 0.0:
                los.append(0.0)
                his.append(0.0)
                continue
            v = x * y
            neg = (x > 0.0) != (y > 0.0)
            los.append(_cand_down(v, False, neg))
            his.append(_cand_up(v, False, not neg))
    return Interval(min(los), max(his))


def div(a: Interval, b: Interval) -> Interval:
    """Enclosure of a / b; a zero-containing divisor widens to the hull of
    the two half-line results (the whole line when 0 is interior)."""
    if a.is_empty or b.is_empty:
        return EMPTY
    if b.lo > 0.0 or b.hi < 0.0:
        los = []
        his = []
        for x in (a.lo, a.hi):
            for y in (b.lo, b.hi):
                if x == 0.0 or math.isinf(y):
                    # 0/y is exact; x/inf tends to 0, whose closure is 0.
                    los.append(0.0)
                    his.append(0.0)
                    continue
                v = x / y
                neg = (x > 0.0) != (y > 0.0)
                los.append(_cand_down(v, False, neg))
                his.append(_cand_up(v, False, not neg))
        return Interval(min(los), max(his))
    if b.lo == 0.0 and b.hi == 0.0:
        return EMPTY if not a.contains(0.0) else WHOLE
    if a.contains(0.0):
        return WHOLE
    if b.lo == 0.0:  # b = [0, hi]
        if a.lo > 0.0:
            return Interval(_down(a.lo / b.hi), _INF)
        return Interval(-_INF, _up(a.hi / b.hi))
    if b.hi == 0.0:  # b = [lo, 0]
        if a.lo > 0.0:
            return Interval(-_INF, _up(a.lo / b.lo))
        return Interval(_down(a.hi / b.lo), _INF)
    return WHOLE  # 0 interior to b


def absolute(a: Interval) -> Interval:
    if a.is_empty:
        return EMPTY
    if a.lo >= 0.0:
        return a
    if a.hi <= 0.0:
        return Interval(-a.hi, -a.lo)
    return Interval(0.0, max(-a.lo, a.hi))


def inv_abs(target: Interval) -> Interval:
    """Preimage of ``target`` under abs: hull of +/- (target intersected
    with the nonnegative axis)."""
    nn = target.intersect(Interval(0.0, _INF))
    if nn.is_empty:
        return EMPTY
    return Interval(-nn.hi, nn.hi)


_OPS = {"+": add, "-": sub, "*": mul, "/": div}


def apply_op(op: str, a: Interval, b: Interval) -> Interval:
    return _OPS[op](a, b)
