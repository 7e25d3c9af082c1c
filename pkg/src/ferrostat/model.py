"""The cellular iron homeostasis ODE model.

Five species are tracked (all concentrations in mol/L):

    Fe     usable intracellular iron
    TfR1   transferrin receptor (iron importer)
    FPN1a  ferroportin (iron exporter)
    Ft     iron-filled ferritin (storage)
    IRP    iron regulatory protein activity

The external input is the transferrin saturation ``Tf_sat`` (dimensionless
fraction).  Regulation switches are Hill-type sigmoids ``sig_plus`` of
steepness ``n`` (default 30, i.e. nearly a step).

All rates are per second, all concentrations mol/L.  ``nFt`` is the number
of iron atoms stored per ferritin and ``kFe_export`` is a second-order
constant (L/mol/s); every other ``k*`` is either a zeroth-order production
(mol/L/s) or a first-order rate (1/s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from . import _kernels as _k
from .errors import DomainError

STATE_ORDER = ("Fe", "TfR1", "FPN1a", "Ft", "IRP")

# ParameterSet field name -> (vector index, unit, name used in formulas and
# constraint files).
PARAM_INFO = {
    "kFe_input": (_k.I_K_FE_INPUT, "1/s", "k_Fe_input"),
    "kFe_export": (_k.I_K_FE_EXPORT, "L/mol/s", "k_Fe_export"),
    "kFe_cons": (_k.I_K_FE_CONS, "1/s", "k_Fe_cons"),
    "nFt": (_k.I_N_FT, "1", "n_Ft"),
    "kIRP_prod": (_k.I_K_IRP_PROD, "mol/L/s", "k_IRP_prod"),
    "kFe_IRP": (_k.I_K_FE_IRP, "1/s", "k_Fe_IRP"),
    "thetaFe_IRP": (_k.I_THETA_FE_IRP, "mol/L", "theta_Fe_IRP"),
    "kIRP_deg": (_k.I_K_IRP_DEG, "1/s", "k_IRP_deg"),
    "kFt_prod": (_k.I_K_FT_PROD, "mol/L/s", "k_Ft_prod"),
    "kIRP_Ft": (_k.I_K_IRP_FT, "mol/L/s", "k_IRP_Ft"),
    "thetaIRP_Ft": (_k.I_THETA_IRP_FT, "mol/L", "theta_IRP_Ft"),
    "kFt_deg": (_k.I_K_FT_DEG, "1/s", "k_Ft_deg"),
    "kFPN1a_prod": (_k.I_K_FPN1A_PROD, "mol/L/s", "k_FPN1a_prod"),
    "kIRP_FPN1a": (_k.I_K_IRP_FPN1A, "mol/L/s", "k_IRP_FPN1a"),
    "thetaIRP_FPN1a": (_k.I_THETA_IRP_FPN1A, "mol/L", "theta_IRP_FPN1a"),
    "kFPN1a_deg": (_k.I_K_FPN1A_DEG, "1/s", "k_FPN1a_deg"),
    "kTfR1_prod": (_k.I_K_TFR1_PROD, "mol/L/s", "k_TfR1_prod"),
    "kIRP_TfR1": (_k.I_K_IRP_TFR1, "1/s", "k_IRP_TfR1"),
    "kTfR1_deg": (_k.I_K_TFR1_DEG, "1/s", "k_TfR1_deg"),
    "n": (_k.I_N_HILL, "1", "n"),
}

PARAM_FIELDS = tuple(PARAM_INFO)
#: Formula-facing name -> dataclass field name.
FORMULA_NAMES = {info[2]: field for field, info in PARAM_INFO.items()}


def sig_plus(x: float, theta: float, n: float) -> float:
    """Hill sigmoid x^n / (x^n + theta^n), evaluated overflow-safely.

    Computed through the ratio r = x/theta, switching to the reciprocal form
    1/(1 + r^-n) for r > 1 so r^n never overflows.  Nondecreasing in x with
    values in [0, 1]; sig_plus(theta, theta, n) is exactly 0.5.
    """
    if theta <= 0.0:
        raise DomainError(f"sig_plus threshold must be positive, got {theta}")
    if n < 1.0:
        raise DomainError(f"sig_plus steepness must be >= 1, got {n}")
    return float(_k.sig_plus_k(float(x), float(theta), float(n)))


@dataclass(frozen=True)
class StateVector:
    """Concentrations of the five species, mol/L."""

    Fe: float
    TfR1: float
    FPN1a: float
    Ft: float
    IRP: float

    def as_array(self) -> np.ndarray:
        return np.array([self.Fe, self.TfR1, self.FPN1a, self.Ft, self.IRP])

    @classmethod
    def from_array(cls, a) -> "StateVector":
        return cls(*(float(v) for v in a))

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in STATE_ORDER}


@dataclass(frozen=True)
class ParameterSet:
    """The twenty model parameters.

    ``n`` is the sigmoid steepness shared by all three regulation switches.
    Thresholds (``theta*``) are mol/L; see the module docstring for the unit
    conventions of the rate constants.
    """

    kFe_input: float
    kFe_export: float
    kFe_cons: float
    nFt: float
    kIRP_prod: float
    kFe_IRP: float
    thetaFe_IRP: float
    kIRP_deg: float
    kFt_prod: float
    kIRP_Ft: float
    thetaIRP_Ft: float
    kFt_deg: float
    kFPN1a_prod: float
    kIRP_FPN1a: float
    thetaIRP_FPN1a: float
    kFPN1a_deg: float
    kTfR1_prod: float
    kIRP_TfR1: float
    kTfR1_deg: float
    n: float = 30.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v) or v < 0.0:
                raise DomainError(f"parameter {f.name} must be finite and >= 0, got {v}")
        if self.nFt < 1.0:
            raise DomainError(f"nFt must be >= 1, got {self.nFt}")
        if self.n < 1.0:
            raise DomainError(f"sigmoid steepness n must be >= 1, got {self.n}")

    def as_vector(self) -> np.ndarray:
        v = np.empty(_k.N_PARAMS)
        for field, (idx, _, _) in PARAM_INFO.items():
            v[idx] = getattr(self, field)
        return v

    @classmethod
    def from_vector(cls, v) -> "ParameterSet":
        return cls(**{field: float(v[idx]) for field, (idx, _, _) in PARAM_INFO.items()})

    def replace(self, **changes) -> "ParameterSet":
        return replace(self, **changes)

    def bindings(self) -> dict:
        """Map of formula-facing parameter names (k_Fe_cons, ...) to values."""
        return {info[2]: getattr(self, field) for field, info in PARAM_INFO.items()}

    def as_dict(self) -> dict:
        return {field: getattr(self, field) for field in PARAM_FIELDS}


@dataclass(frozen=True)
class InputSchedule:
    """Piecewise-constant transferrin saturation input.

    ``initial`` applies from t = 0; each (time, value) switch replaces it
    from that time on (right-continuous).  Switch times must be strictly
    increasing and positive; values must lie in [0, 1].
    """

    initial: float
    switches: tuple = ()

    def __post_init__(self):
        if not 0.0 <= self.initial <= 1.0:
            raise DomainError(f"Tf_sat must be in [0, 1], got {self.initial}")
        prev = 0.0
        for time, value in self.switches:
            if time <= prev:
                raise DomainError("switch times must be strictly increasing and > 0")
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"Tf_sat must be in [0, 1], got {value}")
            prev = time

    def value_at(self, t: float) -> float:
        v = self.initial
        for time, value in self.switches:
            if t >= time:
                v = value
            else:
                break
        return v

    def segments(self, horizon: float):
        """Yield (t_start, t_end, value) covering [0, horizon]."""
        bounds = [0.0]
        values = [self.initial]
        for time, value in self.switches:
            if time < horizon:
                bounds.append(time)
                values.append(value)
        bounds.append(horizon)
        for i, value in enumerate(values):
            yield bounds[i], bounds[i + 1], value


def rhs(state: StateVector, params: ParameterSet, tf_sat: float) -> StateVector:
    """Time derivatives of the five species (mol/L/s) under the full model."""
    out = np.empty(5)
    _k.rhs_k(state.as_array(), params.as_vector(), float(tf_sat), out)
    return StateVector.from_array(out)


def rhs_replete(state: StateVector, params: ParameterSet, tf_sat: float) -> StateVector:
    """Derivatives under the iron-replete step-function approximation.

    The iron sigmoid is frozen at 1 and both IRP sigmoids at 0; this is the
    regime in which the stationary point has a closed form and the Jacobian
    is upper triangular.
    """
    out = np.empty(5)
    _k.rhs_replete_k(state.as_array(), params.as_vector(), float(tf_sat), out)
    return StateVector.from_array(out)


#: The reference parameter set of the case study (iron-replete Tf_sat = 0.3).
P0 = ParameterSet(
    kFe_input=3.0e-2,
    kFe_export=300.0,
    kFe_cons=3.0e-4,
    nFt=400.0,
    kIRP_prod=8.0e-12,
    kFe_IRP=1.0e-3,
    thetaFe_IRP=1.5e-7,
    kIRP_deg=1.4e-5,
    kFt_prod=7.0e-11,
    kIRP_Ft=7.0e-11,
    thetaIRP_Ft=3.0e-8,
    kFt_deg=5.0e-3,
    kFPN1a_prod=2.5e-12,
    kIRP_FPN1a=5.0e-13,
    thetaIRP_FPN1a=3.0e-8,
    kFPN1a_deg=5.0e-6,
    kTfR1_prod=1.7e-13,
    kIRP_TfR1=1.4e-4,
    kTfR1_deg=2.4e-5,
    n=30.0,
)

#: Iron-replete transferrin saturation used throughout the case study.
TF_SAT_REPLETE = 0.3

#: Literature intervals for the eight measured parameters (field name ->
#: (lo, hi)); lo = 0.0 encodes an interval open at zero.
MEASURED_PARAM_BOUNDS = {
    "kFPN1a_deg": (0.0, 9.6e-6),
    "kTfR1_prod": (1.0e-13, 2.0e-13),
    "kIRP_deg": (1.28e-5, 1.6e-5),
    "kTfR1_deg": (2.0e-5, 3.0e-5),
    "kIRP_TfR1": (4.2e-5, 14.4e-5),
    "kFe_input": (2.0e-2, 3.9e-2),
    "nFt": (0.0, 4500.0),
}

#: Search intervals for the remaining parameters, set by analogy: zeroth-order
#: production and regulation strengths share the production-rate range,
#: first-order rates share a wide physiological range, and each threshold
#: shares the concentration range of the species it senses.
ANALOGY_PARAM_BOUNDS = {
    "kIRP_prod": (1.0e-18, 1.0e-10),
    "kFt_prod": (1.0e-18, 1.0e-10),
    "kFPN1a_prod": (1.0e-18, 1.0e-10),
    "kIRP_Ft": (1.0e-18, 1.0e-10),
    "kIRP_FPN1a": (1.0e-18, 1.0e-10),
    "kFe_cons": (0.0, 1.0),
    "kFe_IRP": (1.0e-9, 1.0),
    "kFt_deg": (1.0e-9, 1.0),
    "kFe_export": (0.0, 1.0e5),
    "thetaFe_IRP": (0.0, 2.0e-6),
    "thetaIRP_Ft": (1.0e-13, 1.0e-5),
    "thetaIRP_FPN1a": (1.0e-13, 1.0e-5),
}

#: Full parameter search box (field names).
PARAM_BOUNDS = {**MEASURED_PARAM_BOUNDS, **ANALOGY_PARAM_BOUNDS, "n": (30.0, 30.0)}

#: Iron-replete intervals for the state variables before contraction.
VARIABLE_BOUNDS = {
    "Fe": (0.0, 2.0e-6),
    "IRP": (3.0e-9, 10.7e-9),
    "TfR1": (1.0e-8, 10.0e-8),
    "FPN1a": (1.0e-13, 1.0e-5),
    "Ft": (1.0e-13, 1.0e-5),
}

#: Steady-state target intervals after the interval-solver deductions; these
#: are the bounds the behavioral formulas quote.
TARGET_STEADY_BOUNDS = {
    "Fe": (3.5e-8, 2.0e-6),
    "IRP": (3.0e-9, 1.07e-8),
    "TfR1": (1.0e-8, 8.7e-8),
    "FPN1a": (1.04e-13, 1.0e-5),
    "Ft": (1.0e-13, 1.0e-5),
}

#: Which parameters (field names) adjust which steady-state variable during
#: the ordered tuning procedure; mirrors the dependency structure of the
#: closed forms.
TUNING_GROUPS = {
    "IRP": ("kIRP_prod", "kIRP_deg", "kFe_IRP"),
    "TfR1": ("kIRP_TfR1", "kTfR1_prod", "kTfR1_deg"),
    "FPN1a": ("kFPN1a_prod", "kFPN1a_deg"),
    "Fe": ("kFe_cons", "kFe_export", "kFe_input"),
    "Ft": ("kFt_prod", "kFt_deg"),
}
