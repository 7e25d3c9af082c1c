"""HC4-revise and fixpoint propagation over algebraic constraints.

``hc4_revise`` runs a forward interval evaluation of one constraint's
expression tree followed by a backward projection of the relation onto every
leaf, narrowing the box without ever excluding a point that satisfies the
constraint.  ``propagate`` applies all constraints round-robin from a
worklist until no dimension improves by more than ``eps_improve`` relative
width.

An optional branch-and-contract refinement bisects selected dimensions to a
bounded depth and returns the hull of the surviving sub-boxes; this stays
sound and can only tighten the fixpoint.
"""

from __future__ import annotations

import math

from ..errors import DomainError
from ..expr import Abs, Bin, Const, Constraint, Name, Neg, free_names
from . import core
from .box import Box, relative_shrink
from .core import EMPTY, WHOLE, Interval

_MAX_REVISIONS = 100_000


class _Infeasible(Exception):
    pass


def _forward(node, iv, cache):
    if isinstance(node, Const):
        out = Interval(node.value, node.value)
    elif isinstance(node, Name):
        try:
            out = iv[node.name]
        except KeyError:
            raise DomainError(f"constraint references unknown name {node.name!r}") from None
    elif isinstance(node, Neg):
        out = core.neg(_forward(node.arg, iv, cache))
    elif isinstance(node, Abs):
        out = core.absolute(_forward(node.arg, iv, cache))
    elif isinstance(node, Bin):
        out = core.apply_op(
            node.op, _forward(node.lhs, iv, cache), _forward(node.rhs, iv, cache)
        )
    else:
        raise DomainError(f"node not allowed in constraints: {node!r}")
    cache[id(node)] = out
    return out


def _backward(node, target, iv, cache):
    current = cache[id(node)]
    narrowed = current.intersect(target)
    if narrowed.is_empty:
        raise _Infeasible
    if isinstance(node, Const):
        return
    if isinstance(node, Name):
        meet = iv[node.name].intersect(narrowed)
        if meet.is_empty:
            raise _Infeasible
        iv[node.name] = meet
        return
    if isinstance(node, Neg):
        _backward(node.arg, core.neg(narrowed), iv, cache)
        return
    if isinstance(node, Abs):
        _backward(node.arg, core.inv_abs(narrowed), iv, cache)
        return
    if isinstance(node, Bin):
        a = cache[id(node.lhs)]
        b = cache[id(node.rhs)]
        if node.op == "+":
            _backward(node.lhs, core.sub(narrowed, b), iv, cache)
            _backward(node.rhs, core.sub(narrowed, cache[id(node.lhs)]), iv, cache)
        elif node.op == "-":
            _backward(node.lhs, core.add(narrowed, b), iv, cache)
            _backward(node.rhs, core.sub(cache[id(node.lhs)], narrowed), iv, cache)
        elif node.op == "*":
            _backward(node.lhs, _rel_div(narrowed, b), iv, cache)
            _backward(node.rhs, _rel_div(narrowed, cache[id(node.lhs)]), iv, cache)
        else:  # node = lhs / rhs
            _backward(node.lhs, core.mul(narrowed, b), iv, cache)
            _backward(node.rhs, _rel_div(a, narrowed), iv, cache)
        return
    raise DomainError(f"node not allowed in constraints: {node!r}")


def _rel_div(a: Interval, b: Interval) -> Interval:
    """Relational division {z : z*y in a for some y in b} (hull)."""
    if a.is_empty or b.is_empty:
        return EMPTY
    if b.contains(0.0):
        if a.contains(0.0):
            return WHOLE
        return core.div(a, b)
    return core.div(a, b)


def hc4_revise(c: Constraint, box: Box) -> Box:
    """Contract ``box`` with one constraint; empty result proves infeasibility."""
    missing = free_names(c.lhs) | free_names(c.rhs)
    missing.difference_update(box.names())
    if missing:
        raise DomainError(f"constraint references names outside the box: {sorted(missing)}")
    iv = box.copy_intervals()
    try:
        _revise_inplace(c, iv)
    except _Infeasible:
        return box.empty_like()
    return Box(iv)


def _revise_inplace(c: Constraint, iv: dict):
    if c.rel not in ("=", "<=", ">="):
        raise DomainError(f"unsupported relation {c.rel!r}")
    cache: dict = {}
    left = _forward(c.lhs, iv, cache)
    right = _forward(c.rhs, iv, cache)
    if left.is_empty or right.is_empty:
        raise _Infeasible
    if c.rel == "=":
        target_l = left.intersect(right)
        if target_l.is_empty:
            raise _Infeasible
    elif c.rel == "<=":
        target_l = Interval(-math.inf, right.hi)
    else:
        target_l = Interval(right.lo, math.inf)
    _backward(c.lhs, target_l, iv, cache)

    # Second pass for the right side, with a fresh forward evaluation so its
    # projection sees the already-narrowed left-hand range.
    cache_r: dict = {}
    left2 = _forward(c.lhs, iv, cache_r)
    _forward(c.rhs, iv, cache_r)
    if c.rel == "=":
        target_r = left2
    elif c.rel == "<=":
        target_r = Interval(left2.lo, math.inf)
    else:
        target_r = Interval(-math.inf, left2.hi)
    _backward(c.rhs, target_r, iv, cache_r)


def propagate(
    constraints,
    box: Box,
    eps_improve: float = 1e-3,
    bisect_depth: int = 0,
    bisect_names=None,
) -> Box:
    """AC-3 style fixpoint of :func:`hc4_revise` over all constraints.

    Terminates when no dimension shrinks by more than ``eps_improve``
    relative width (monotone narrowing guarantees termination together with
    a revision cap).  The result is a sub-box of ``box`` containing every
    point of ``box`` that satisfies all constraints; an empty box proves the
    system infeasible within ``box``.

    ``bisect_depth`` > 0 additionally branches on the listed dimensions
    (widest relative width first) and hulls the surviving leaves.
    """
    if not 0.0 < eps_improve < 1.0:
        raise DomainError("eps_improve must lie in (0, 1)")
    constraints = list(constraints)
    result = _propagate_fixpoint(constraints, box, eps_improve)
    if bisect_depth > 0 and not result.is_empty:
        result = _branch_hull(
            constraints, result, eps_improve, bisect_depth, bisect_names
        )
    return result


def _propagate_fixpoint(constraints, box: Box, eps: float) -> Box:
    deps: dict[str, list[int]] = {}
    for idx, c in enumerate(constraints):
        for name in free_names(c.lhs) | free_names(c.rhs):
            deps.setdefault(name, []).append(idx)

    iv = box.copy_intervals()
    queue = list(range(len(constraints)))
    queued = set(queue)
    revisions = 0
    while queue:
        if revisions >= _MAX_REVISIONS:
            break
        revisions += 1
        idx = queue.pop(0)
        queued.discard(idx)
        before = dict(iv)
        try:
            _revise_inplace(constraints[idx], iv)
        except _Infeasible:
            return box.empty_like()
        for name, old in before.items():
            new = iv[name]
            if new != old and relative_shrink(old, new) > eps:
                for dep in deps.get(name, ()):
                    if dep not in queued:
                        queue.append(dep)
                        queued.add(dep)
    return Box(iv)


def _branch_hull(constraints, box: Box, eps, depth, names) -> Box:
    if depth == 0 or box.is_empty:
        return box
    candidates = list(names) if names else list(box.names())
    pick, pick_width = None, 0.0
    for name in candidates:
        ivn = box[name]
        if ivn.is_empty or math.isinf(ivn.width):
            continue
        scale = max(abs(ivn.lo), abs(ivn.hi), 1e-300)
        rel = ivn.width / scale
        if rel > pick_width:
            pick, pick_width = name, rel
    if pick is None or pick_width < 1e-9:
        return box
    ivp = box[pick]
    if ivp.lo > 0.0 and ivp.hi / ivp.lo > 100.0:
        mid = math.sqrt(ivp.lo * ivp.hi)  # geometric split for wide positive ranges
    else:
        mid = 0.5 * (ivp.lo + ivp.hi)
    halves = (Interval(ivp.lo, mid), Interval(mid, ivp.hi))
    hull = None
    for half in halves:
        sub = _propagate_fixpoint(constraints, box.with_interval(pick, half), eps)
        if sub.is_empty:
            continue
        sub = _branch_hull(constraints, sub, eps, depth - 1, names)
        if sub.is_empty:
            continue
        hull = sub if hull is None else Box(
            {n: hull[n].hull(sub[n]) for n in hull.names()}
        )
    return hull if hull is not None else box.empty_like()
