"""Arithmetic expression trees shared by formula predicates and constraints.

The grammar covers numeric literals (with ``inf``), named references, the
four arithmetic operators with usual precedence, unary minus and ``abs()``.
Predicates additionally reference trace signals: ``var[t]`` (current value),
``var[c]`` with a numeric constant ``c`` (value frozen at absolute time c,
seconds) and ``ddt{var}[t]`` (current derivative).  Constraint files use the
same grammar with signal references disallowed.

Arithmetic on literals is folded at parse time, so ``6*3600`` in a time
position is the literal 21600.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import ParseError

# --------------------------------------------------------------------------
# Nodes


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Name:
    """A named quantity resolved from the evaluation environment or box."""

    name: str


@dataclass(frozen=True)
class Signal:
    """Current value of a trace variable: ``var[t]``."""

    name: str


@dataclass(frozen=True)
class SignalAt:
    """Trace variable frozen at an absolute time (seconds): ``var[14400]``."""

    name: str
    at: float


@dataclass(frozen=True)
class Deriv:
    """Current derivative of a trace variable: ``ddt{var}[t]``."""

    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Abs:
    arg: object


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * /
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Constraint:
    """Two expressions related by ``=``, ``<=`` or ``>=`` (closed relations)."""

    lhs: object
    rel: str
    rhs: object

    def __str__(self):
        return f"{expr_to_str(self.lhs)} {self.rel} {expr_to_str(self.rhs)}"


def walk(node):
    yield node
    for child in _children(node):
        yield from walk(child)


def _children(node):
    if isinstance(node, (Neg, Abs)):
        return (node.arg,)
    if isinstance(node, Bin):
        return (node.lhs, node.rhs)
    return ()


def free_names(node):
    """All Name references in an expression."""
    return {n.name for n in walk(node) if isinstance(n, Name)}


def signal_names(node):
    return {n.name for n in walk(node) if isinstance(n, (Signal, SignalAt, Deriv))}


# --------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>:=|<=|>=|[<>=()\[\]{},+\-*/])
""",
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'number', 'ident', 'sym', 'end'
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {text[pos]!r}", line=line, column=col
            )
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            tokens.append(Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    tokens.append(Token("end", "", line, col))
    return tokens


class TokenStream:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def accept(self, text: str):
        tok = self.peek()
        if tok.text == text and tok.kind in ("sym", "ident"):
            return self.next()
        return None

    def expect(self, text: str, expected=None) -> Token:
        tok = self.peek()
        if tok.text != text:
            raise ParseError(
                f"unexpected {tok.text!r}" if tok.kind != "end" else "unexpected end of input",
                line=tok.line,
                column=tok.column,
                expected=expected or (f"'{text}'",),
            )
        return self.next()

    def error(self, message, expected=()):
        tok = self.peek()
        raise ParseError(message, line=tok.line, column=tok.column, expected=expected)


RESERVED = {"and", "or", "not", "ev", "alw", "ev_", "alw_", "abs", "ddt", "inf", "t"}


# --------------------------------------------------------------------------
# Parser (precedence climbing)


def parse_arith(ts: TokenStream, allow_signals: bool):
    node = _parse_term(ts, allow_signals)
    while ts.peek().text in ("+", "-") and ts.peek().kind == "sym":
        op = ts.next().text
        rhs = _parse_term(ts, allow_signals)
        node = _fold(Bin(op, node, rhs))
    return node


def _parse_term(ts, allow_signals):
    node = _parse_factor(ts, allow_signals)
    while ts.peek().text in ("*", "/") and ts.peek().kind == "sym":
        op = ts.next().text
        rhs = _parse_factor(ts, allow_signals)
        node = _fold(Bin(op, node, rhs))
    return node


def _parse_factor(ts, allow_signals):
    if ts.accept("-"):
        return _fold(Neg(_parse_factor(ts, allow_signals)))
    return _parse_atom(ts, allow_signals)


def _parse_atom(ts, allow_signals):
    tok = ts.peek()
    if tok.kind == "number":
        ts.next()
        return Const(float(tok.text))
    if tok.kind == "ident":
        if tok.text == "inf":
            ts.next()
            return Const(math.inf)
        if tok.text == "abs":
            ts.next()
            ts.expect("(")
            arg = parse_arith(ts, allow_signals)
            ts.expect(")")
            return _fold(Abs(arg))
        if tok.text == "ddt":
            if not allow_signals:
                ts.error("signal references are not allowed here")
            ts.next()
            ts.expect("{")
            name_tok = ts.next()
            if name_tok.kind != "ident":
                ts.error("expected a variable name", expected=("identifier",))
            ts.expect("}")
            ts.expect("[")
            ts.expect("t")
            ts.expect("]")
            return Deriv(name_tok.text)
        ts.next()
        name = tok.text
        if ts.peek().text == "(":
            raise ParseError(
                f"unknown function {name!r}",
                line=tok.line,
                column=tok.column,
                expected=("abs",),
            )
        if ts.peek().text == "[":
            if not allow_signals:
                ts.error("signal references are not allowed here")
            ts.next()
            if ts.accept("t"):
                ts.expect("]")
                return Signal(name)
            at = parse_const_expr(ts)
            ts.expect("]")
            return SignalAt(name, at)
        if name in RESERVED:
            raise ParseError(
                f"reserved word {name!r} cannot be used as a name",
                line=tok.line,
                column=tok.column,
            )
        return Name(name)
    if tok.text == "(":
        ts.next()
        node = parse_arith(ts, allow_signals)
        ts.expect(")")
        return node
    ts.error("expected an expression", expected=("number", "identifier", "'('", "'-'"))


def parse_const_expr(ts: TokenStream) -> float:
    """Parse an arithmetic expression of literals and fold it to a number."""
    tok = ts.peek()
    node = parse_arith(ts, allow_signals=False)
    if not isinstance(node, Const):
        raise ParseError(
            "expected a constant arithmetic expression",
            line=tok.line,
            column=tok.column,
        )
    return node.value


def _fold(node):
    if isinstance(node, Neg) and isinstance(node.arg, Const):
        return Const(-node.arg.value)
    if isinstance(node, Abs) and isinstance(node.arg, Const):
        return Const(abs(node.arg.value))
    if isinstance(node, Bin) and isinstance(node.lhs, Const) and isinstance(node.rhs, Const):
        a, b = node.lhs.value, node.rhs.value
        try:
            if node.op == "+":
                return Const(a + b)
            if node.op == "-":
                return Const(a - b)
            if node.op == "*":
                return Const(a * b)
            if b != 0.0:
                return Const(a / b)
        except (OverflowError, ValueError):
            pass
    return node


_REL_OPS = ("<=", ">=", "<", ">", "=")


def parse_constraint(text: str) -> Constraint:
    """Parse ``expr REL expr`` with REL in {=, <=, >=, <, >}.

    Strict inequalities are accepted and treated as their closures, matching
    how interval propagation handles open constraints.
    """
    ts = TokenStream(tokenize(text))
    lhs = parse_arith(ts, allow_signals=False)
    tok = ts.peek()
    if tok.text not in _REL_OPS:
        ts.error("expected a relation", expected=_REL_OPS)
    ts.next()
    rhs = parse_arith(ts, allow_signals=False)
    if ts.peek().kind != "end":
        ts.error("trailing input after constraint")
    rel = {"<": "<=", ">": ">="}.get(tok.text, tok.text)
    return Constraint(lhs, rel, rhs)


def parse_expression(text: str, allow_signals: bool = True):
    ts = TokenStream(tokenize(text))
    node = parse_arith(ts, allow_signals)
    if ts.peek().kind != "end":
        ts.error("trailing input after expression")
    return node


# --------------------------------------------------------------------------
# Printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def expr_to_str(node) -> str:
    return _print(node, 0)


def _print(node, parent_prec):
    if isinstance(node, Const):
        return format_number(node.value)
    if isinstance(node, Name):
        return node.name
    if isinstance(node, Signal):
        return f"{node.name}[t]"
    if isinstance(node, SignalAt):
        return f"{node.name}[{format_number(node.at)}]"
    if isinstance(node, Deriv):
        return f"ddt{{{node.name}}}[t]"
    if isinstance(node, Abs):
        return f"abs({_print(node.arg, 0)})"
    if isinstance(node, Neg):
        inner = _print(node.arg, 3)
        text = f"-{inner}"
        return f"({text})" if parent_prec >= 3 else text
    if isinstance(node, Bin):
        prec = _PREC[node.op]
        lhs = _print(node.lhs, prec)
        # Right operand needs parens at equal precedence for - and /.
        rhs = _print(node.rhs, prec + (0 if node.op in "+*" else 1))
        text = f"{lhs} {node.op} {rhs}"
        return f"({text})" if parent_prec >= prec and parent_prec > 0 else text
    raise TypeError(f"not an expression node: {node!r}")


def format_number(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)
