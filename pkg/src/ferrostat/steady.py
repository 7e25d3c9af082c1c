"""Closed-form stationary point, stability, and the signed interaction graph.

In the iron-replete regime the iron sigmoid saturates at 1 and both IRP
sigmoids at 0, which decouples the algebraic system into a triangular one
with a unique closed-form solution.  The Jacobian of that regime-approximated
system (state order Fe, TfR1, FPN1a, Ft, IRP) is upper triangular, so its
eigenvalues are the diagonal entries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateParametersError
from .model import STATE_ORDER, ParameterSet, StateVector


@dataclass(frozen=True)
class SteadyState:
    """Stationary point with its local linearization.

    ``regime_consistent`` records whether the returned point actually lies in
    the regime the closed forms assume (Fe above the iron threshold, IRP
    below both IRP thresholds); a False value flags that the algebraic
    solution is not a steady state of the full sigmoidal system.
    """

    state: StateVector
    jacobian: np.ndarray
    eigenvalues: tuple
    stable: bool
    regime_consistent: bool

    def to_json_dict(self) -> dict:
        return {
            "state": self.state.as_dict(),
            "jacobian": [[float(v) for v in row] for row in self.jacobian],
            "eigenvalues": list(self.eigenvalues),
            "stable": self.stable,
            "regimeConsistent": self.regime_consistent,
            "units": {"state": "mol/L", "jacobian": "1/s", "eigenvalues": "1/s"},
        }


def steady_state(params: ParameterSet, tf_sat: float) -> SteadyState:
    """Evaluate the closed-form stationary point of the replete regime.

    Solved in dependency order: IRP and the protein pools are independent of
    Fe, and Fe follows from the iron balance once TfR1 and FPN1a are known.
    """
    k_loss = params.kIRP_deg + params.kFe_IRP
    denom_fe = params.kFe_export * params.kFPN1a_prod + params.kFe_cons * params.kFPN1a_deg
    for name, value in (
        ("kFt_deg", params.kFt_deg),
        ("kFPN1a_deg", params.kFPN1a_deg),
        ("kTfR1_deg", params.kTfR1_deg),
        ("kIRP_deg + kFe_IRP", k_loss),
        ("kFe_export*kFPN1a_prod + kFe_cons*kFPN1a_deg", denom_fe),
    ):
        if value == 0.0:
            raise DegenerateParametersError(f"steady state undefined: {name} = 0")

    ft = params.kFt_prod / params.kFt_deg
    fpn1a = params.kFPN1a_prod / params.kFPN1a_deg
    irp = params.kIRP_prod / k_loss
    tfr1 = (k_loss * params.kTfR1_prod + params.kIRP_TfR1 * params.kIRP_prod) / (
        k_loss * params.kTfR1_deg
    )
    fe = (
        tf_sat
        * params.kFPN1a_deg
        * params.kFe_input
        * (params.kTfR1_prod * k_loss + params.kIRP_TfR1 * params.kIRP_prod)
    ) / (denom_fe * k_loss * params.kTfR1_deg)

    state = StateVector(Fe=fe, TfR1=tfr1, FPN1a=fpn1a, Ft=ft, IRP=irp)
    jac = jacobian_at(params, state, tf_sat)
    eig = tuple(float(jac[i, i]) for i in range(5))
    consistent = (
        fe > params.thetaFe_IRP
        and irp < params.thetaIRP_Ft
        and irp < params.thetaIRP_FPN1a
    )
    return SteadyState(
        state=state,
        jacobian=jac,
        eigenvalues=eig,
        stable=all(v < 0.0 for v in eig),
        regime_consistent=consistent,
    )


def jacobian_at(params: ParameterSet, state: StateVector, tf_sat: float = 0.3) -> np.ndarray:
    """Analytic Jacobian of the regime-approximated system at ``state``.

    Upper triangular in the order Fe, TfR1, FPN1a, Ft, IRP.  Agrees with
    central finite differences of the replete right-hand side.
    """
    j = np.zeros((5, 5))
    # Row Fe
    j[0, 0] = -state.FPN1a * params.kFe_export - params.kFe_cons
    j[0, 1] = tf_sat * params.kFe_input
    j[0, 2] = -state.Fe * params.kFe_export
    j[0, 3] = params.kFt_deg * params.nFt
    # Row TfR1
    j[1, 1] = -params.kTfR1_deg
    j[1, 4] = params.kIRP_TfR1
    # Row FPN1a
    j[2, 2] = -params.kFPN1a_deg
    # Row Ft
    j[3, 3] = -params.kFt_deg
    # Row IRP
    j[4, 4] = -params.kIRP_deg - params.kFe_IRP
    return j


def stability(params: ParameterSet) -> dict:
    """Eigenvalues read off the triangular diagonal; stable iff all < 0."""
    eig = (
        -(params.kFPN1a_prod / params.kFPN1a_deg) * params.kFe_export - params.kFe_cons
        if params.kFPN1a_deg > 0.0
        else -params.kFe_cons,
        -params.kTfR1_deg,
        -params.kFPN1a_deg,
        -params.kFt_deg,
        -params.kIRP_deg - params.kFe_IRP,
    )
    return {"stable": all(v < 0.0 for v in eig), "eigenvalues": tuple(float(v) for v in eig)}


@dataclass(frozen=True)
class SignedDigraph:
    """Signed directed graph over the model variables.

    An arc (u, v, sign) is present iff the Jacobian entry d(dv/dt)/du of the
    full sigmoidal system is structurally nonzero; the sign is constant over
    the admissible (strictly positive) parameter region.
    """

    nodes: tuple
    arcs: tuple  # of (from, to, sign) with sign in {+1, -1}

    def successors(self, node):
        return [(v, s) for (u, v, s) in self.arcs if u == node]

    def to_edge_list(self) -> str:
        """Plain text edge list: ``from to sign`` per line."""
        lines = [f"{u} {v} {'+' if s > 0 else '-'}" for (u, v, s) in self.arcs]
        return "\n".join(lines) + "\n"


# Structural terms of the full-system Jacobian, after substituting the
# ferritin equation into the iron balance.  Each entry (source -> target)
# has a single term whose sign does not depend on where it is evaluated:
#   d(dFe/dt)/dTfR1   = +k_Fe_input*Tf_sat
#   d(dFe/dt)/dFPN1a  = -k_Fe_export*Fe
#   d(dFe/dt)/dFt     = +n_Ft*k_Ft_deg
#   d(dFe/dt)/dIRP    = +n_Ft*k_IRP_Ft*sig'(IRP)   (release of stored iron)
#   d(dTfR1/dt)/dIRP  = +k_IRP_TfR1
#   d(dFPN1a/dt)/dIRP = -k_IRP_FPN1a*sig'(IRP)
#   d(dFt/dt)/dIRP    = -k_IRP_Ft*sig'(IRP)
#   d(dIRP/dt)/dFe    = -k_Fe_IRP*sig'(Fe)*IRP
# plus one negative self-loop per variable (degradation/consumption).
_FULL_SYSTEM_ARCS = (
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
)


def interaction_graph(params: ParameterSet) -> SignedDigraph:
    """Signed digraph of the full sigmoidal system (not the regime approximation)."""
    for field in (
        "kFe_input",
        "kFe_export",
        "kFe_cons",
        "kIRP_prod",
        "kFe_IRP",
        "kIRP_deg",
        "kFt_prod",
        "kIRP_Ft",
        "kFt_deg",
        "kFPN1a_prod",
        "kIRP_FPN1a",
        "kFPN1a_deg",
        "kTfR1_prod",
        "kIRP_TfR1",
        "kTfR1_deg",
    ):
        if getattr(params, field) <= 0.0:
            raise DegenerateParametersError(
                f"interaction graph needs strictly positive parameters ({field} = 0)"
            )
    return SignedDigraph(nodes=STATE_ORDER, arcs=_FULL_SYSTEM_ARCS)


def enumerate_circuits(g: SignedDigraph):
    """All elementary cycles with their sign (product of arc signs).

    Plain DFS enumeration anchored at the smallest node of each cycle; the
    graphs here have five nodes, so no sophistication is needed.  Cycles are
    reported as node tuples starting at the anchor, self-loops as length-1
    tuples.
    """
    order = {n: i for i, n in enumerate(g.nodes)}
    adj = {}
    for u, v, s in g.arcs:
        adj.setdefault(u, []).append((v, s))

    cycles = []

    def dfs(anchor, node, path, sign, visiting):
        for nxt, s in adj.get(node, ()):  # noqa: B023 - adj is fixed
            if nxt == anchor:
                cycles.append((tuple(path), sign * s))
            elif order[nxt] > order[anchor] and nxt not in visiting:
                visiting.add(nxt)
                path.append(nxt)
                dfs(anchor, nxt, path, sign * s, visiting)
                path.pop()
                visiting.remove(nxt)

    for anchor in g.nodes:
        dfs(anchor, anchor, [anchor], +1, {anchor})
    cycles.sort(key=lambda c: (len(c[0]), tuple(order[n] for n in c[0])))
    return cycles


def circuit_census(g: SignedDigraph) -> dict:
    """Counts of positive/negative circuits, split by length."""
    census = {
        "negative_self_loops": 0,
        "positive_self_loops": 0,
        "negative_long": 0,
        "positive_long": 0,
    }
    for nodes, sign in enumerate_circuits(g):
        key = ("negative" if sign < 0 else "positive") + (
            "_self_loops" if len(nodes) == 1 else "_long"
        )
        census[key] += 1
    return census


def steady_state_report(params: ParameterSet, tf_sat: float) -> str:
    return json.dumps(steady_state(params, tf_sat).to_json_dict(), indent=2)
