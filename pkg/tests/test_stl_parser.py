import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ferrostat.errors import ParseError
from ferrostat.expr import (
    Abs,
    Bin,
    Const,
    Deriv,
    Name,
    Neg,
    Signal,
    SignalAt,
    parse_constraint,
    parse_expression,
)
from ferrostat.stl import parse, format_formula, parse_formula_file
from ferrostat.stl.nodes import Alw, And, Ev, Not, Or, Predicate
from ferrostat.stl.parser import format_formula_file


class TestGrammar:
    def test_unbounded_always(self):
        f = parse("alw (Fe[t] < 2e-6)")
        assert f == Alw(0.0, math.inf, Predicate("<", Signal("Fe"), Const(2e-6)))

    def test_nested_plateau_formula(self):
        f = parse(
            "ev_[21600, inf] (alw_[0, 36000] ((abs(ddt{Fe}[t]/Fe[t]) < 1.0e-4)"
            " and (Fe[t] > 0.01*Fe[14400])))"
        )
        assert isinstance(f, Ev)
        assert f.a == 21600.0 and math.isinf(f.b)
        inner = f.arg
        assert isinstance(inner, Alw) and inner.b == 36000.0
        conj = inner.arg
        assert isinstance(conj, And)
        steady = conj.lhs
        assert steady == Predicate(
            "<", Abs(Bin("/", Deriv("Fe"), Signal("Fe"))), Const(1e-4)
        )
        floor = conj.rhs
        assert floor == Predicate(
            ">", Signal("Fe"), Bin("*", Const(0.01), SignalAt("Fe", 14400.0))
        )

    def test_window_arithmetic_folding(self):
        f = parse("ev_[6*3600, 2*3600*4] (x[t] > 0)")
        assert f.a == 21600.0 and f.b == 28800.0

    def test_malformed_interval(self):
        with pytest.raises(ParseError):
            parse("alw_[5, 1] (x[t] > 0)")
        with pytest.raises(ParseError):
            parse("ev_[-1, 5] (x[t] > 0)")

    def test_unknown_function(self):
        with pytest.raises(ParseError, match="unknown function"):
            parse("sin(x[t]) < 1")

    def test_error_carries_location(self):
        with pytest.raises(ParseError) as err:
            parse("alw (x[t] <")
        assert err.value.line == 1
        assert err.value.column is not None

    def test_boolean_precedence(self):
        f = parse("x[t] > 0 and y[t] > 0 or z[t] > 0")
        assert isinstance(f, Or) and isinstance(f.lhs, And)

    def test_not_operator(self):
        f = parse("not (x[t] > 0)")
        assert isinstance(f, Not)

    def test_parenthesized_arithmetic_vs_formula(self):
        # '(' may open a predicate's arithmetic or a sub-formula.
        f = parse("(x[t] + 1) * 2 < 4")
        assert isinstance(f, Predicate)
        g = parse("((x[t] < 1)) and (y[t] < 2)")
        assert isinstance(g, And)

    def test_whitespace_insensitive(self):
        a = parse("ev_[0,10](x[t]<1)")
        b = parse("ev_[ 0 , 10 ]  ( x[t] < 1 )")
        assert a == b

    def test_parameter_references(self):
        f = parse("IRP[t] < theta_IRP_Ft")
        assert f == Predicate("<", Signal("IRP"), Name("theta_IRP_Ft"))

    def test_reserved_words_rejected_as_names(self):
        with pytest.raises(ParseError):
            parse("ev < 1")


class TestExpressions:
    def test_signal_forms(self):
        assert parse_expression("Fe[t]") == Signal("Fe")
        assert parse_expression("Fe[4*3600]") == SignalAt("Fe", 14400.0)
        assert parse_expression("ddt{Fe}[t]") == Deriv("Fe")

    def test_signals_rejected_in_constraints(self):
        with pytest.raises(ParseError):
            parse_constraint("Fe[t] <= 2")

    def test_constraint_strict_relations_closed(self):
        assert parse_constraint("x < 1").rel == "<="
        assert parse_constraint("x > 1").rel == ">="
        assert parse_constraint("x = 1").rel == "="

    def test_precedence_and_unary(self):
        e = parse_expression("-a + b * c", allow_signals=False)
        assert e == Bin("+", Neg(Name("a")), Bin("*", Name("b"), Name("c")))

    def test_constant_folding(self):
        assert parse_expression("6*3600 + 10", allow_signals=False) == Const(21610.0)


class TestFormulaFiles:
    def test_named_definitions_and_substitution(self):
        text = """
# comment line
base := x[t] > 1
wrapped := alw_[0, 5] (base)
both := (base) and (wrapped)
"""
        named = parse_formula_file(text)
        assert named["base"] == Predicate(">", Signal("x"), Const(1.0))
        assert named["wrapped"] == Alw(0.0, 5.0, named["base"])
        assert named["both"] == And(named["base"], named["wrapped"])

    def test_prefix_names_do_not_collide(self):
        # phi_S1 must not be substituted inside phi_S14.
        text = (
            "phi_S1 := x[t] > 1\n"
            "phi_S14 := y[t] > 14\n"
            "use := (phi_S14) and (phi_S1)\n"
        )
        named = parse_formula_file(text)
        assert named["use"] == And(
            Predicate(">", Signal("y"), Const(14.0)),
            Predicate(">", Signal("x"), Const(1.0)),
        )

    def test_duplicate_definition_rejected(self):
        with pytest.raises(ParseError, match="twice"):
            parse_formula_file("a := x[t] > 1\na := x[t] > 2\n")

    def test_bad_line_rejected(self):
        with pytest.raises(ParseError):
            parse_formula_file("just some text\n")

    def test_round_trip_through_file(self):
        named = {"a": parse("ev_[0, 10] (x[t] < 1)")}
        text = format_formula_file(named)
        assert parse_formula_file(text)["a"] == named["a"]


# --------------------------------------------------------------------------
# Parse/print round trip over generated formulas

_names = st.sampled_from(["x", "y", "Fe"])
_numbers = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
).map(lambda v: round(v, 6))


def _exprs():
    leaves = st.one_of(
        _numbers.map(Const),
        _names.map(Signal),
        _names.map(Deriv),
        st.builds(SignalAt, _names, st.integers(0, 100).map(float)),
        st.sampled_from(["k_a", "k_b"]).map(Name),
    )
    return st.recursive(
        leaves,
        lambda ch: st.one_of(
            st.builds(Bin, st.sampled_from("+-*/"), ch, ch),
            ch.map(Abs),
            ch.map(Neg),
        ),
        max_leaves=6,
    )


def _windows():
    return st.tuples(st.integers(0, 50), st.integers(0, 50)).map(
        lambda ab: (float(min(ab)), float(max(ab)))
    )


def formulas(max_depth=4):
    preds = st.builds(Predicate, st.sampled_from(["<", "<=", ">", ">="]), _exprs(), _exprs())
    return st.recursive(
        preds,
        lambda ch: st.one_of(
            st.builds(And, ch, ch),
            st.builds(Or, ch, ch),
            ch.map(Not),
            st.builds(lambda w, f: Ev(w[0], w[1], f), _windows(), ch),
            st.builds(lambda w, f: Alw(w[0], w[1], f), _windows(), ch),
        ),
        max_leaves=max_depth,
    )


@settings(max_examples=300, deadline=None)
@given(formulas())
def test_parse_print_round_trip(f):
    # The parser constant-folds, so normalize generated trees through one
    # parse; from then on print/parse must be an exact fixpoint.
    g = parse(format_formula(f))
    assert parse(format_formula(g)) == g
