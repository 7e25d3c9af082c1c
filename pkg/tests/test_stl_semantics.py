import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import stl_oracle
from ferrostat.errors import DomainError, UnboundNameError
from ferrostat.expr import Bin, Const, Deriv, Name, Signal, SignalAt
from ferrostat.stl import EvalEnvironment, eval_bool, parse, robustness
from ferrostat.stl.nodes import Alw, And, Ev, Not, Or, Predicate
from ferrostat.trace import trace_from_samples


def const_trace(value=1.0, n=21):
    t = np.arange(n, dtype=float)
    return trace_from_samples(t, {"x": np.full(n, value)})


class TestTrivialSemantics:
    def test_constant_predicate_true(self):
        env = EvalEnvironment(const_trace())
        f = parse("x[t] < 2")
        for t in (0.0, 3.5, 20.0):
            assert eval_bool(f, env, t) is True
        assert robustness(f, env, 0.0) == 1.0

    def test_eventually_false_on_constant(self):
        env = EvalEnvironment(const_trace())
        f = parse("ev_[0,10] (x[t] > 2)")
        assert eval_bool(f, env, 0.0) is False
        assert robustness(f, env, 0.0) == -1.0

    def test_always_constant_margin(self):
        env = EvalEnvironment(const_trace())
        f = parse("alw_[0,10] (x[t] < 2)")
        assert robustness(f, env, 0.0) == 1.0

    def test_time_outside_domain(self):
        env = EvalEnvironment(const_trace())
        f = parse("x[t] < 2")
        with pytest.raises(DomainError):
            eval_bool(f, env, 100.0)
        with pytest.raises(DomainError):
            robustness(f, env, -1.0)

    def test_unbound_names(self):
        env = EvalEnvironment(const_trace())
        with pytest.raises(UnboundNameError):
            eval_bool(parse("zz[t] < 2"), env, 0.0)
        with pytest.raises(UnboundNameError):
            eval_bool(parse("x[t] < some_param"), env, 0.0)

    def test_parameter_bindings(self):
        env = EvalEnvironment(const_trace(), params={"k": 5.0})
        assert robustness(parse("x[t] < k"), env, 0.0) == 4.0

    def test_frozen_reference(self):
        t = np.arange(11, dtype=float)
        env = EvalEnvironment(trace_from_samples(t, {"x": t * 2.0}))
        # x frozen at absolute time 5 is 10, regardless of evaluation time.
        f = parse("x[5] < 11")
        assert robustness(f, env, 0.0) == 1.0
        assert robustness(f, env, 8.0) == 1.0

    def test_interpolation_between_samples(self):
        t = np.array([0.0, 10.0])
        env = EvalEnvironment(trace_from_samples(t, {"x": np.array([0.0, 10.0])}))
        assert robustness(parse("x[t] < 100"), env, 2.5) == 97.5

    def test_derivative_channel(self):
        t = np.arange(5, dtype=float)
        env = EvalEnvironment(
            trace_from_samples(t, {"x": t}, derivs={"x": np.full(5, 3.0)})
        )
        assert robustness(parse("ddt{x}[t] < 4"), env, 0.0) == 1.0

    def test_strict_mode_raises_beyond_horizon(self):
        env = EvalEnvironment(const_trace(n=5), truncate=False)
        with pytest.raises(DomainError):
            eval_bool(parse("alw_[0, 100] (x[t] < 2)"), env, 0.0)

    def test_truncation_mode_clips(self):
        env = EvalEnvironment(const_trace(n=5))
        assert eval_bool(parse("alw_[0, 100] (x[t] < 2)"), env, 0.0) is True

    def test_empty_window_conventions(self):
        env = EvalEnvironment(const_trace(n=5))
        assert eval_bool(parse("ev_[100, 200] (x[t] < 2)"), env, 0.0) is False
        assert eval_bool(parse("alw_[100, 200] (x[t] > 2)"), env, 0.0) is True
        assert robustness(parse("ev_[100, 200] (x[t] < 2)"), env, 0.0) == -math.inf

    def test_undefined_predicate_is_falsified(self):
        t = np.arange(3, dtype=float)
        env = EvalEnvironment(trace_from_samples(t, {"x": np.zeros(3)}))
        f = parse("x[t] / x[t] < 2")  # 0/0 everywhere
        assert eval_bool(f, env, 0.0) is False
        assert robustness(f, env, 0.0) == -math.inf


# --------------------------------------------------------------------------
# Property tests against the brute-force oracle

_var_names = ("x", "y")


def _traces():
    return st.integers(min_value=3, max_value=25).flatmap(
        lambda n: st.builds(
            lambda xs, ys, dxs: trace_from_samples(
                np.arange(n, dtype=float),
                {"x": np.array(xs), "y": np.array(ys)},
                derivs={"x": np.array(dxs)},
            ),
            st.lists(st.floats(-5, 5), min_size=n, max_size=n),
            st.lists(st.floats(-5, 5), min_size=n, max_size=n),
            st.lists(st.floats(-5, 5), min_size=n, max_size=n),
        )
    )


def _int_exprs():
    leaves = st.one_of(
        st.integers(-4, 4).map(lambda v: Const(float(v))),
        st.sampled_from(_var_names).map(Signal),
        st.just(Deriv("x")),
        st.builds(SignalAt, st.sampled_from(_var_names), st.integers(0, 2).map(float)),
        st.just(Name("k")),
    )
    return st.recursive(
        leaves,
        lambda ch: st.builds(Bin, st.sampled_from("+-*/"), ch, ch),
        max_leaves=4,
    )


def _int_formulas():
    preds = st.builds(
        Predicate, st.sampled_from(["<", "<=", ">", ">="]), _int_exprs(), _int_exprs()
    )
    windows = st.tuples(st.integers(0, 12), st.integers(0, 12)).map(
        lambda ab: (float(min(ab)), float(max(ab)))
    )
    return st.recursive(
        preds,
        lambda ch: st.one_of(
            st.builds(And, ch, ch),
            st.builds(Or, ch, ch),
            ch.map(Not),
            st.builds(lambda w, f: Ev(w[0], w[1], f), windows, ch),
            st.builds(lambda w, f: Alw(w[0], w[1], f), windows, ch),
        ),
        max_leaves=4,
    )


PARAMS = {"k": 2.0}


@settings(max_examples=250, deadline=None)
@given(_traces(), _int_formulas())
def test_matches_brute_force_oracle(trace, formula):
    env = EvalEnvironment(trace, PARAMS)
    for i in (0, len(trace) // 2, len(trace) - 1):
        t = float(trace.times[i])
        got_rob = robustness(formula, env, t)
        want_rob = stl_oracle.oracle_rob(formula, trace, PARAMS, i)
        assert got_rob == want_rob or got_rob == pytest.approx(want_rob, rel=1e-12)
        got_bool = eval_bool(formula, env, t)
        want_bool = stl_oracle.oracle_bool(formula, trace, PARAMS, i)
        assert got_bool == want_bool


@settings(max_examples=250, deadline=None)
@given(_traces(), _int_formulas())
def test_robustness_sign_matches_boolean(trace, formula):
    env = EvalEnvironment(trace, PARAMS)
    for i in (0, len(trace) - 1):
        t = float(trace.times[i])
        rob = robustness(formula, env, t)
        ok = eval_bool(formula, env, t)
        if rob > 1e-12:
            assert ok
        elif rob < -1e-12:
            assert not ok


@settings(max_examples=200, deadline=None)
@given(
    _traces(),
    _int_formulas(),
    st.tuples(st.integers(0, 10), st.integers(0, 10)).map(
        lambda ab: (float(min(ab)), float(max(ab)))
    ),
)
def test_ev_alw_duality_exact(trace, inner, window):
    a, b = window
    env = EvalEnvironment(trace, PARAMS)
    lhs = Not(Ev(a, b, inner))
    rhs = Alw(a, b, Not(inner))
    for t in (0.0, float(trace.times[-1] // 2)):
        assert robustness(lhs, env, t) == robustness(rhs, env, t)
        assert eval_bool(lhs, env, t) == eval_bool(rhs, env, t)


@settings(max_examples=200, deadline=None)
@given(
    _traces(),
    _int_formulas(),
    st.tuples(st.integers(0, 8), st.integers(0, 8)).map(
        lambda ab: (float(min(ab)), float(max(ab)))
    ),
)
def test_alw_bounded_by_ev(trace, inner, window):
    a, b = window
    if a > trace.t_end:  # empty windows give +inf vs -inf by convention
        return
    env = EvalEnvironment(trace, PARAMS)
    assert robustness(Alw(a, b, inner), env, 0.0) <= robustness(Ev(a, b, inner), env, 0.0)


@settings(max_examples=150, deadline=None)
@given(_traces(), _int_formulas(), st.integers(0, 6).map(float))
def test_degenerate_window_equals_shifted_evaluation(trace, inner, a):
    if a > trace.t_end:
        return
    env = EvalEnvironment(trace, PARAMS)
    direct_rob = robustness(inner, env, a)
    assert robustness(Ev(a, a, inner), env, 0.0) == direct_rob
    assert robustness(Alw(a, a, inner), env, 0.0) == direct_rob
    assert eval_bool(Ev(a, a, inner), env, 0.0) == eval_bool(inner, env, a)
    assert eval_bool(Alw(a, a, inner), env, 0.0) == eval_bool(inner, env, a)
