import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ferrostat.errors import DomainError
from ferrostat.model import (
    P0,
    TF_SAT_REPLETE,
    InputSchedule,
    ParameterSet,
    StateVector,
    rhs,
    rhs_replete,
    sig_plus,
)


class TestSigPlus:
    def test_symmetry_point(self):
        assert sig_plus(1.5e-7, 1.5e-7, 30) == 0.5

    def test_zero_numerator(self):
        assert sig_plus(0.0, 1.5e-7, 30) == 0.0

    def test_high_precision_value(self):
        # x/theta = 2: exact value 1/(1 + 2^-30) = 2^30/(2^30 + 1).
        expected = 1073741824 / 1073741825
        assert sig_plus(3.0e-7, 1.5e-7, 30) == pytest.approx(expected, rel=1e-15)

    def test_overflow_safety(self):
        # x/theta ~ 1e6 at n = 30 would overflow a direct power.
        assert sig_plus(1.5e-1, 1.5e-7, 30) == 1.0
        assert 0.0 < sig_plus(1.5e-13, 1.5e-7, 30) < 1e-150

    def test_bad_theta(self):
        with pytest.raises(DomainError):
            sig_plus(1.0, 0.0, 30)
        with pytest.raises(DomainError):
            sig_plus(1.0, -1.0, 30)

    def test_bad_steepness(self):
        with pytest.raises(DomainError):
            sig_plus(1.0, 1.0, 0.5)

    @given(
        st.floats(min_value=0.0, max_value=1e-3),
        st.floats(min_value=0.0, max_value=1e-3),
    )
    def test_nondecreasing_and_bounded(self, x1, x2):
        lo, hi = sorted((x1, x2))
        a = sig_plus(lo, 1.5e-7, 30)
        b = sig_plus(hi, 1.5e-7, 30)
        assert 0.0 <= a <= b <= 1.0


class TestRhs:
    def test_steady_state_nulls_rhs(self, p0_steady):
        d = rhs(p0_steady.state, P0, TF_SAT_REPLETE)
        for name in ("Fe", "TfR1", "FPN1a", "Ft", "IRP"):
            assert abs(getattr(d, name)) < 1e-18

    def test_all_zero_state(self):
        d = rhs(StateVector(0, 0, 0, 0, 0), P0, TF_SAT_REPLETE)
        # dFe = -nFt*kFt_prod; dIRP = kIRP_prod (sigmoids vanish at zero).
        assert d.Fe == pytest.approx(-400 * 7e-11, rel=1e-12)
        assert d.IRP == pytest.approx(8.0e-12, rel=1e-12)
        assert d.Ft == pytest.approx(7e-11, rel=1e-12)

    def test_cutoff_drains_iron(self, p0_steady):
        d = rhs(p0_steady.state, P0, 0.0)
        assert d.Fe < 0.0

    def test_iron_balance_identity(self, p0_trace):
        # Restated iron balance: dFe + nFt*dFt + export + consumption - input = 0.
        tr = p0_trace
        fe, tfr1, fpn1a = tr.column("Fe"), tr.column("TfR1"), tr.column("FPN1a")
        dfe, dft = tr.deriv_column("Fe"), tr.deriv_column("Ft")
        terms = np.stack(
            [
                dfe,
                P0.nFt * dft,
                P0.kFe_export * fe * fpn1a,
                P0.kFe_cons * fe,
                -P0.kFe_input * tfr1 * tr.tf_sat,
            ]
        )
        residual = np.abs(terms.sum(axis=0))
        scale = np.abs(terms).max(axis=0)
        ok = scale > 0
        assert np.all(residual[ok] / scale[ok] < 1e-12)

    def test_replete_approximation_matches_at_p0(self, p0_steady):
        # Deep in the replete regime the full and frozen-sigmoid systems agree.
        d_full = rhs(p0_steady.state, P0, TF_SAT_REPLETE).as_array()
        d_appr = rhs_replete(p0_steady.state, P0, TF_SAT_REPLETE).as_array()
        assert np.allclose(d_full, d_appr, atol=1e-20)


class TestParameterSet:
    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            P0.replace(kFe_cons=-1.0)

    def test_rejects_small_nft(self):
        with pytest.raises(DomainError):
            P0.replace(nFt=0.5)

    def test_vector_round_trip(self):
        assert ParameterSet.from_vector(P0.as_vector()) == P0

    def test_bindings_names(self):
        b = P0.bindings()
        assert b["k_Fe_cons"] == 3.0e-4
        assert b["theta_IRP_Ft"] == 3.0e-8
        assert b["n_Ft"] == 400.0
        assert len(b) == 20


class TestInputSchedule:
    def test_value_at_and_segments(self):
        s = InputSchedule(initial=0.3, switches=((21600.0, 0.0),))
        assert s.value_at(0.0) == 0.3
        assert s.value_at(21599.0) == 0.3
        assert s.value_at(21600.0) == 0.0  # right-continuous
        assert list(s.segments(48 * 3600.0)) == [
            (0.0, 21600.0, 0.3),
            (21600.0, 172800.0, 0.0),
        ]

    def test_switch_after_horizon_ignored(self):
        s = InputSchedule(initial=0.3, switches=((21600.0, 0.0),))
        assert list(s.segments(10000.0)) == [(0.0, 10000.0, 0.3)]

    def test_validation(self):
        with pytest.raises(DomainError):
            InputSchedule(initial=1.5)
        with pytest.raises(DomainError):
            InputSchedule(initial=0.3, switches=((10.0, 0.1), (10.0, 0.2)))
        with pytest.raises(DomainError):
            InputSchedule(initial=0.3, switches=((10.0, 2.0),))
