import math

import numpy as np
import pytest

from ferrostat.errors import DegenerateParametersError
from ferrostat.model import P0, TF_SAT_REPLETE, ParameterSet, StateVector, rhs_replete
from ferrostat.simulate import simulate
from ferrostat.model import InputSchedule, PARAM_BOUNDS, TARGET_STEADY_BOUNDS
from ferrostat.steady import (
    SignedDigraph,
    circuit_census,
    enumerate_circuits,
    interaction_graph,
    jacobian_at,
    stability,
    steady_state,
)


class TestClosedForms:
    def test_p0_values(self, p0_steady):
        # Independent arithmetic on the stationary-point formulas.
        s = p0_steady.state
        assert s.Ft == pytest.approx(7e-11 / 5e-3, rel=1e-12)
        assert s.FPN1a == pytest.approx(2.5e-12 / 5e-6, rel=1e-12)
        loss = 1.4e-5 + 1.0e-3
        assert s.IRP == pytest.approx(8.0e-12 / loss, rel=1e-12)
        tfr1 = (loss * 1.7e-13 + 1.4e-4 * 8.0e-12) / (loss * 2.4e-5)
        assert s.TfR1 == pytest.approx(tfr1, rel=1e-12)
        fe = 0.3 * 5e-6 * 3e-2 * (1.7e-13 * loss + 1.4e-4 * 8e-12) / (
            (300 * 2.5e-12 + 3e-4 * 5e-6) * loss * 2.4e-5
        )
        assert s.Fe == pytest.approx(fe, rel=1e-12)

    def test_p0_inside_intervals(self, p0_steady):
        s = p0_steady.state
        for name, (lo, hi) in TARGET_STEADY_BOUNDS.items():
            assert lo <= getattr(s, name) <= hi

    def test_long_simulation_converges_to_closed_form(self, p0_steady):
        # Oracle: integrate from a perturbed start and compare the endpoint.
        init = StateVector.from_array(1.3 * p0_steady.state.as_array())
        tr = simulate(P0, init, InputSchedule(initial=0.3), 3e6, grid_dt=3600.0)
        end = tr.states[-1]
        ref = p0_steady.state.as_array()
        assert np.all(np.abs(end - ref) / ref < 1e-3)

    def test_regime_consistency_flag(self, p0_steady):
        assert p0_steady.regime_consistent
        # Raising the iron threshold above the stationary iron level breaks
        # the regime assumption; the flag must say so.
        bad = steady_state(P0.replace(thetaFe_IRP=2e-6), TF_SAT_REPLETE)
        assert not bad.regime_consistent

    def test_tfr1_collapses_without_irp_coupling(self):
        p = P0.replace(kIRP_TfR1=0.0, kIRP_prod=0.0)
        ss = steady_state(p, TF_SAT_REPLETE)
        assert ss.state.TfR1 == pytest.approx(P0.kTfR1_prod / P0.kTfR1_deg, rel=1e-12)

    def test_degenerate_parameters(self):
        with pytest.raises(DegenerateParametersError):
            steady_state(P0.replace(kFt_deg=0.0), TF_SAT_REPLETE)

    def test_report_shape(self, p0_steady):
        d = p0_steady.to_json_dict()
        assert set(d) == {"state", "jacobian", "eigenvalues", "stable", "regimeConsistent", "units"}
        assert len(d["jacobian"]) == 5 and len(d["eigenvalues"]) == 5


class TestJacobian:
    def test_iron_row_entry(self, p0_steady):
        j = p0_steady.jacobian
        assert j[0, 0] == pytest.approx(-(5e-7 * 300 + 3e-4), rel=1e-12)
        assert j[0, 3] == pytest.approx(P0.kFt_deg * P0.nFt, rel=1e-12)
        assert j[1, 4] == pytest.approx(P0.kIRP_TfR1, rel=1e-12)

    def test_upper_triangular(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            p = _random_params(rng)
            state = StateVector(*rng.uniform(1e-9, 1e-6, size=5))
            j = jacobian_at(p, state)
            assert np.all(j[np.tril_indices(5, k=-1)] == 0.0)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            p = _random_params(rng)
            state = StateVector(*rng.uniform(1e-9, 1e-6, size=5))
            j = jacobian_at(p, state, tf_sat=TF_SAT_REPLETE)
            fd = _fd_jacobian(p, state, TF_SAT_REPLETE)
            scale = np.abs(j).max()
            assert np.all(np.abs(j - fd) <= 1e-6 * np.maximum(np.abs(j), scale * 1e-3))


class TestStability:
    def test_p0_stable(self, p0_steady):
        assert p0_steady.stable
        assert all(ev < 0 for ev in p0_steady.eigenvalues)

    def test_eigenvalues_equal_diagonal(self, p0_steady):
        diag = [p0_steady.jacobian[i, i] for i in range(5)]
        assert list(p0_steady.eigenvalues) == diag

    def test_eigenvalue_formulas(self):
        res = stability(P0)
        fpn1a = P0.kFPN1a_prod / P0.kFPN1a_deg
        expected = {
            -fpn1a * P0.kFe_export - P0.kFe_cons,
            -P0.kTfR1_deg,
            -P0.kFPN1a_deg,
            -P0.kFt_deg,
            -P0.kIRP_deg - P0.kFe_IRP,
        }
        assert set(res["eigenvalues"]) == expected

    def test_positive_parameters_always_stable(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            assert stability(_random_params(rng))["stable"]


class TestInteractionGraph:
    def test_arc_set(self):
        g = interaction_graph(P0)
        arcs = set(g.arcs)
        expected = {
            ("TfR1", "Fe", +1),
            ("FPN1a", "Fe", -1),
            ("Ft", "Fe", +1),
            ("IRP", "Fe", +1),
            ("IRP", "TfR1", +1),
            ("IRP", "FPN1a", -1),
            ("IRP", "Ft", -1),
            ("Fe", "IRP", -1),
            ("Fe", "Fe", -1),
            ("TfR1", "TfR1", -1),
            ("FPN1a", "FPN1a", -1),
            ("Ft", "Ft", -1),
            ("IRP", "IRP", -1),
        }
        assert arcs == expected

    def test_circuit_census(self):
        census = circuit_census(interaction_graph(P0))
        assert census == {
            "negative_self_loops": 5,
            "positive_self_loops": 0,
            "negative_long": 3,
            "positive_long": 1,
        }

    def test_specific_circuits(self):
        cycles = dict(enumerate_circuits(interaction_graph(P0)))
        assert cycles[("Fe", "IRP")] == -1  # iron <-> its regulator
        assert cycles[("Fe", "IRP", "Ft")] == +1  # storage release loop

    def test_empty_graph(self):
        g = SignedDigraph(nodes=("a", "b"), arcs=())
        assert enumerate_circuits(g) == []

    def test_requires_positive_parameters(self):
        with pytest.raises(DegenerateParametersError):
            interaction_graph(P0.replace(kFe_IRP=0.0))

    def test_edge_list_export(self):
        text = interaction_graph(P0).to_edge_list()
        lines = text.strip().split("\n")
        assert "IRP Fe +" in lines
        assert "Fe IRP -" in lines
        assert len(lines) == 13


def _random_params(rng) -> ParameterSet:
    changes = {}
    for field, (lo, hi) in PARAM_BOUNDS.items():
        if field == "n":
            continue
        lo_eff = lo if lo > 0 else hi * 1e-6
        changes[field] = float(np.exp(rng.uniform(np.log(lo_eff), np.log(hi))))
    changes["nFt"] = max(1.0, changes["nFt"])
    return P0.replace(**changes)


def _fd_jacobian(p, state, tf_sat):
    x0 = state.as_array()
    out = np.zeros((5, 5))
    for j in range(5):
        h = 1e-6 * max(abs(x0[j]), 1e-12)
        xp, xm = x0.copy(), x0.copy()
        xp[j] += h
        xm[j] -= h
        fp = rhs_replete(StateVector.from_array(xp), p, tf_sat).as_array()
        fm = rhs_replete(StateVector.from_array(xm), p, tf_sat).as_array()
        out[:, j] = (fp - fm) / (2 * h)
    return out
