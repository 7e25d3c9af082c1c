"""Recursive-descent parser for the temporal logic concrete syntax.

Grammar (whitespace-insensitive)::

    formula  := disj
    disj     := conj ('or' conj)*
    conj     := unary ('and' unary)*
    unary    := 'not' unary
              | ('ev' | 'alw') window? '(' formula ')'
              | '(' formula ')'
              | predicate
    window   := '_'? '[' const ',' (const | 'inf') ']'
    predicate:= arith CMP arith          CMP in  <  <=  >  >=

Arithmetic follows :mod:`ferrostat.expr` and may reference signals
(``var[t]``, ``var[c]``, ``ddt{var}[t]``) and named parameters.  A bare
``ev``/``alw`` means the window [0, inf).  Arithmetic over literals is
constant-folded, so windows like ``[6*3600, inf]`` are fine.

A ``(`` may open either a sub-formula or a parenthesized arithmetic
expression; the parser backtracks to decide.
"""

from __future__ import annotations

import math
import re

from ..errors import ParseError
from ..expr import TokenStream, parse_arith, parse_const_expr, tokenize
from .nodes import Alw, And, Ev, Not, Or, Predicate

_CMP = ("<=", ">=", "<", ">")


def parse(text: str):
    """Parse a single formula."""
    ts = TokenStream(tokenize(text))
    f = _parse_formula(ts)
    if ts.peek().kind != "end":
        ts.error("trailing input after formula")
    return f


def _parse_formula(ts):
    return _parse_or(ts)


def _parse_or(ts):
    node = _parse_and(ts)
    while ts.peek().text == "or" and ts.peek().kind == "ident":
        ts.next()
        node = Or(node, _parse_and(ts))
    return node


def _parse_and(ts):
    node = _parse_unary(ts)
    while ts.peek().text == "and" and ts.peek().kind == "ident":
        ts.next()
        node = And(node, _parse_unary(ts))
    return node


def _parse_unary(ts):
    tok = ts.peek()
    if tok.kind == "ident" and tok.text == "not":
        ts.next()
        return Not(_parse_unary(ts))
    if tok.kind == "ident" and tok.text in ("ev", "alw", "ev_", "alw_"):
        ts.next()
        a, b = 0.0, math.inf
        if tok.text.endswith("_"):
            a, b = _parse_window(ts, tok)
        elif ts.peek().text == "[":
            a, b = _parse_window(ts, tok)
        ts.expect("(")
        arg = _parse_formula(ts)
        ts.expect(")")
        return Ev(a, b, arg) if tok.text.startswith("ev") else Alw(a, b, arg)
    if tok.text == "(":
        # Either a parenthesized formula or a parenthesized arithmetic
        # sub-expression of a predicate; try the formula reading first.
        mark = ts.pos
        ts.next()
        try:
            inner = _parse_formula(ts)
            ts.expect(")")
        except ParseError:
            ts.pos = mark
            return _parse_predicate(ts)
        nxt = ts.peek()
        if nxt.kind == "sym" and nxt.text in ("+", "-", "*", "/", *_CMP):
            ts.pos = mark
            return _parse_predicate(ts)
        return inner
    return _parse_predicate(ts)


def _parse_window(ts, op_tok):
    ts.expect("[")
    a = parse_const_expr(ts)
    ts.expect(",")
    b = parse_const_expr(ts)
    ts.expect("]")
    if not 0.0 <= a <= b:
        raise ParseError(
            f"temporal window must satisfy 0 <= a <= b, got [{a}, {b}]",
            line=op_tok.line,
            column=op_tok.column,
        )
    return a, b


def _parse_predicate(ts):
    lhs = parse_arith(ts, allow_signals=True)
    tok = ts.peek()
    if tok.text not in _CMP or tok.kind != "sym":
        ts.error("expected a comparison", expected=_CMP)
    ts.next()
    rhs = parse_arith(ts, allow_signals=True)
    return Predicate(tok.text, lhs, rhs)


# --------------------------------------------------------------------------
# Formula files

_DEF_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*:=\s*(.+?)\s*$")


def parse_formula_file(text: str) -> dict:
    """Parse ``name := formula`` lines into an ordered name -> AST map.

    Later lines may reference earlier names; references are substituted
    textually (parenthesized) before parsing, so a named formula behaves as
    a macro.  ``#`` starts a comment; blank lines are ignored.
    """
    sources: dict[str, str] = {}
    formulas: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _DEF_RE.match(line)
        if m is None:
            raise ParseError("expected 'name := formula'", line=lineno, column=1)
        name, body = m.group(1), m.group(2)
        if name in sources:
            raise ParseError(f"formula {name!r} defined twice", line=lineno, column=1)
        body = substitute_names(body, sources)
        try:
            formulas[name] = parse(body)
        except ParseError as exc:
            raise ParseError(
                f"in formula {name!r}: {exc}", line=lineno, column=1
            ) from exc
        sources[name] = body
    return formulas


def substitute_names(body: str, sources: dict) -> str:
    """Replace whole-word references to known names with their source text."""
    if not sources:
        return body
    pattern = re.compile(
        r"\b(" + "|".join(re.escape(n) for n in sources) + r")\b"
    )
    return pattern.sub(lambda m: "(" + sources[m.group(1)] + ")", body)


def format_formula_file(named: dict) -> str:
    """Render name -> source-text (or AST) pairs as a formula file."""
    from .nodes import format_formula

    lines = []
    for name, f in named.items():
        lines.append(f"{name} := {f if isinstance(f, str) else format_formula(f)}")
    return "\n".join(lines) + "\n"
