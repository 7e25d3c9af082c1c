"""Adaptive simulation of the iron model with a piecewise-constant input.

The integrator is an embedded Dormand-Prince 5(4) pair with quartic dense
output (see :mod:`ferrostat._kernels`).  Input switches are handled by
segmentation: integration stops and restarts exactly at every switch time,
so the event is located exactly rather than detected inside a step.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as _k
from .errors import DomainError, IntegrationError, NegativeStateError
from .model import InputSchedule, ParameterSet, StateVector
from .trace import Trace

DEFAULT_REL_TOL = 1e-8
DEFAULT_ABS_TOL = 1e-16
DEFAULT_GRID_DT = 60.0
MAX_STEPS_PER_SEGMENT = 2_000_000


def simulate(
    params: ParameterSet,
    init: StateVector,
    schedule: InputSchedule,
    horizon: float,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    grid_dt: float = DEFAULT_GRID_DT,
) -> Trace:
    """Integrate the model over [0, horizon] and sample a trace.

    The trace contains the uniform reporting grid (spacing ``grid_dt``) plus
    all internally accepted steps and all switch times.  The derivative
    channel is filled from the model right-hand side at each sample, using
    the right-continuous input value.

    Raises :class:`IntegrationError` on step-size underflow (carrying the
    last valid time) and :class:`NegativeStateError` if the solution leaves
    the nonnegative region by more than the integrator's own per-step error
    allowance.  Excursions within that allowance (accepted steps) or within a
    small multiple of ``abs_tol`` (interpolated samples) are clamped to 0, so
    every stored state is admissible.
    """
    if horizon < 0.0:
        raise DomainError(f"horizon must be >= 0, got {horizon}")
    if rel_tol <= 0.0 or abs_tol <= 0.0:
        raise DomainError("tolerances must be positive")
    if grid_dt <= 0.0:
        raise DomainError("grid_dt must be positive")

    p = params.as_vector()
    y0 = init.as_array()

    if horizon == 0.0:
        d = np.empty((1, 5))
        _k.rhs_k(y0, p, schedule.initial, d[0])
        return Trace([0.0], y0.reshape(1, 5), d, [schedule.initial])

    grid = np.arange(0.0, horizon, grid_dt)
    grid = np.append(grid, horizon)

    seg_results = []
    y = y0
    for t_a, t_b, u in schedule.segments(horizon):
        status, ts, ys, rcont = _k.dopri5_segment(
            p, u, t_a, t_b, y, rel_tol, abs_tol, MAX_STEPS_PER_SEGMENT
        )
        if status == _k.STATUS_STEP_UNDERFLOW:
            raise IntegrationError(
                f"step size underflow at t = {ts[-1]:.6g} s (stiffness?)",
                last_time=float(ts[-1]),
            )
        if status == _k.STATUS_STEP_BUDGET:
            raise IntegrationError(
                f"step budget exhausted at t = {ts[-1]:.6g} s",
                last_time=float(ts[-1]),
            )
        if status == _k.STATUS_NEGATIVE_STATE:
            raise NegativeStateError(
                f"state left the nonnegative region beyond tolerance after "
                f"t = {ts[-1]:.6g} s",
                last_time=float(ts[-1]),
            )
        seg_results.append((t_a, t_b, u, ts, rcont))
        y = ys[-1].copy()

    # Sample times: grid + accepted steps + switch boundaries, deduplicated.
    all_times = [grid]
    for _, _, _, ts, _ in seg_results:
        all_times.append(ts)
    times = np.unique(np.concatenate(all_times))
    times = times[(times >= 0.0) & (times <= horizon)]

    states = np.empty((len(times), 5))
    tf_sat = np.empty(len(times))
    derivs = np.empty((len(times), 5))

    for t_a, t_b, u, ts, rcont in seg_results:
        # Right-continuous segment ownership; the final segment also owns its
        # right endpoint.
        if t_b == horizon:
            mask = (times >= t_a) & (times <= t_b)
        else:
            mask = (times >= t_a) & (times < t_b)
        if not np.any(mask):
            continue
        out = np.empty((int(mask.sum()), 5))
        if len(ts) == 1:  # zero-length segment (switch exactly at horizon)
            out[:] = states[np.flatnonzero(mask)[0] - 1]
        else:
            _k.dense_eval(ts, rcont, times[mask], out)
        states[mask] = out
        tf_sat[mask] = u

    low = states.min()
    if low < -64.0 * abs_tol:
        t_bad = float(times[np.argmin(states.min(axis=1))])
        raise NegativeStateError(
            f"interpolated state dropped to {low:.3e} near t = {t_bad:.6g} s",
            last_time=t_bad,
        )
    # Remaining excursions are interpolation noise at or below abs_tol scale;
    # clamp them so downstream consumers see admissible concentrations.
    np.clip(states, 0.0, None, out=states)

    for i in range(len(times)):
        _k.rhs_k(states[i], p, tf_sat[i], derivs[i])

    on_grid = np.isin(times, grid)
    return Trace(times, states, derivs, tf_sat, on_grid)


def cutoff_experiment(
    params: ParameterSet,
    init: StateVector,
    tf_sat: float = 0.3,
    cutoff_time: float = 6 * 3600.0,
    horizon: float = 48 * 3600.0,
    **kwargs,
) -> Trace:
    """The case-study experiment: constant input cut to zero at ``cutoff_time``."""
    schedule = InputSchedule(initial=tf_sat, switches=((cutoff_time, 0.0),))
    return simulate(params, init, schedule, horizon, **kwargs)


def trace_summary(
    trace: Trace,
    cutoff_time: float,
    steadiness_bound: float = 1.0e-4,
    plateau_floor_factor: float = 0.01,
    plateau_reference_time: float = 4 * 3600.0,
    exhaustion_fraction: float = 0.05,
) -> dict:
    """Post-cutoff shape metrics of a trajectory.

    The plateau is the longest contiguous stretch of grid samples after the
    cutoff where iron is relatively steady (|dFe/Fe| below
    ``steadiness_bound``) yet still above ``plateau_floor_factor`` times its
    level frozen at ``plateau_reference_time``.  Exhaustion of a species is
    the first time it falls below ``exhaustion_fraction`` of its pre-cutoff
    level (None if it never does).
    """
    m = trace.on_grid
    t = trace.times[m]
    fe = trace.column("Fe")[m]
    dfe = trace.deriv_column("Fe")[m]
    ft = trace.column("Ft")[m]

    floor = plateau_floor_factor * trace.value_at("Fe", plateau_reference_time)
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.abs(dfe / fe)
    steady = (rate < steadiness_bound) & (fe > floor) & (t >= cutoff_time)

    best_len = 0
    best_start = None
    run_start = None
    for i, flag in enumerate(steady):
        if flag and run_start is None:
            run_start = i
        if (not flag or i == len(steady) - 1) and run_start is not None:
            stop = i if not flag else i + 1
            if stop - run_start > best_len:
                best_len = stop - run_start
                best_start = run_start
            run_start = None

    def first_below(values, level):
        idx = np.flatnonzero((t >= cutoff_time) & (values <= level))
        return float(t[idx[0]]) if len(idx) else None

    fe_ref = float(trace.value_at("Fe", cutoff_time))
    ft_ref = float(trace.value_at("Ft", cutoff_time))
    summary = {
        "plateau_start_s": float(t[best_start]) if best_start is not None else None,
        "plateau_duration_s": float(t[best_start + best_len - 1] - t[best_start])
        if best_start is not None
        else 0.0,
        "plateau_floor": floor,
        "ft_exhaustion_s": first_below(ft, exhaustion_fraction * ft_ref),
        "fe_exhaustion_s": first_below(fe, exhaustion_fraction * fe_ref),
        "fe_max": float(trace.column("Fe").max()),
        "units": {"times": "s", "concentrations": "mol/L"},
    }
    return summary
