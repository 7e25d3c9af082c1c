"""ferrostat: parameter-space exploration of ODE models against temporal-logic
specifications, with a built-in cellular iron homeostasis case study."""

from .model import P0, InputSchedule, ParameterSet, StateVector, rhs, rhs_replete, sig_plus
from .simulate import cutoff_experiment, simulate, trace_summary
from .steady import (
    SteadyState,
    enumerate_circuits,
    interaction_graph,
    jacobian_at,
    stability,
    steady_state,
)
from .trace import Trace

__version__ = "0.1.0"

__all__ = [
    "P0",
    "InputSchedule",
    "ParameterSet",
    "StateVector",
    "SteadyState",
    "Trace",
    "cutoff_experiment",
    "enumerate_circuits",
    "interaction_graph",
    "jacobian_at",
    "rhs",
    "rhs_replete",
    "sig_plus",
    "simulate",
    "stability",
    "steady_state",
    "trace_summary",
    "__version__",
]
