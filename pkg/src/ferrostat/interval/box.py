"""Axis-aligned boxes: named maps of intervals."""

from __future__ import annotations

import math

from ..errors import DomainError
from .core import EMPTY, Interval


class Box:
    """A mapping name -> :class:`Interval` over parameters and/or variables.

    Boxes behave like immutable values in the public API (operations return
    new boxes); the contractor mutates a private copy internally.
    """

    __slots__ = ("_iv",)

    def __init__(self, intervals=None):
        self._iv = {}
        for name, iv in dict(intervals or {}).items():
            if not isinstance(iv, Interval):
                lo, hi = iv
                iv = Interval(float(lo), float(hi))
            self._iv[name] = iv

    def names(self):
        return self._iv.keys()

    def __contains__(self, name):
        return name in self._iv

    def __len__(self):
        return len(self._iv)

    def __getitem__(self, name) -> Interval:
        try:
            return self._iv[name]
        except KeyError:
            raise DomainError(f"box has no dimension {name!r}") from None

    def __iter__(self):
        return iter(self._iv.items())

    def __eq__(self, other):
        return isinstance(other, Box) and self._iv == other._iv

    def with_interval(self, name, iv: Interval) -> "Box":
        new = dict(self._iv)
        new[name] = iv
        return Box(new)

    def updated(self, changes: dict) -> "Box":
        new = dict(self._iv)
        new.update(
            (k, v if isinstance(v, Interval) else Interval(*map(float, v)))
            for k, v in changes.items()
        )
        return Box(new)

    def restrict(self, names) -> "Box":
        return Box({n: self._iv[n] for n in names})

    @property
    def is_empty(self) -> bool:
        return any(iv.is_empty for iv in self._iv.values())

    def empty_like(self) -> "Box":
        return Box({n: EMPTY for n in self._iv})

    def contains_point(self, point: dict, names=None) -> bool:
        for name in names if names is not None else self._iv:
            if not self._iv[name].contains(point[name]):
                return False
        return True

    def is_subset_of(self, other: "Box") -> bool:
        return all(self._iv[n].is_subset_of(other[n]) for n in self._iv)

    def as_dict(self) -> dict:
        return {n: (iv.lo, iv.hi) for n, iv in self._iv.items()}

    def copy_intervals(self) -> dict:
        return dict(self._iv)

    def __repr__(self):
        inner = ", ".join(f"{n}: {iv}" for n, iv in self._iv.items())
        return f"Box({inner})"


def relative_shrink(old: Interval, new: Interval) -> float:
    """How much narrower ``new`` is than ``old``, as a fraction of ``old``.

    Infinite-width reductions (one endpoint coming in from infinity) count
    as a full shrink.
    """
    if new.is_empty:
        return 1.0
    ow, nw = old.width, new.width
    if math.isinf(ow):
        if not math.isinf(nw):
            return 1.0
        if (math.isinf(old.lo) and math.isfinite(new.lo)) or (
            math.isinf(old.hi) and math.isfinite(new.hi)
        ):
            return 1.0
        delta = 0.0
        scale = 1.0
        for o, n in ((old.lo, new.lo), (old.hi, new.hi)):
            if math.isfinite(o) and math.isfinite(n):
                delta = max(delta, abs(n - o))
                scale = max(scale, abs(o), abs(n))
        return min(1.0, delta / scale)
    if ow == 0.0:
        return 0.0
    return max(0.0, (ow - nw) / ow)
