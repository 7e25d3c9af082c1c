"""Parameter-space exploration: tuning, pinning, sensitivity, and the
Monte-Carlo expansion of a robust parameter region.

All boxes and reports here use the formula-facing parameter names
(``k_Fe_cons``, ``theta_IRP_Ft``, ...) so they compose directly with formula
environments and constraint files.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DegenerateParametersError,
    FerrostatError,
    NoValidPointError,
    SpecFalsifiedError,
)
from .interval import Box
from .model import (
    FORMULA_NAMES,
    PARAM_INFO,
    TF_SAT_REPLETE,
    TUNING_GROUPS,
    ParameterSet,
)
from .simulate import DEFAULT_ABS_TOL, DEFAULT_GRID_DT, DEFAULT_REL_TOL, simulate
from .steady import steady_state
from .stl import EvalEnvironment, IronSpec, eval_bool, robustness
from .model import InputSchedule

#: Exploration dimensions: every kinetic parameter except the pinned
#: regulation strength k_IRP_Ft; the sigmoid steepness n and the input
#: Tf_sat are structural constants.
FREE_PARAMETERS = tuple(
    info[2]
    for fieldname, info in PARAM_INFO.items()
    if fieldname not in ("kIRP_Ft", "n")
)

#: Parameters scanned by the sensitivity analysis (all kinetic parameters).
SENSITIVITY_PARAMETERS = tuple(
    info[2] for fieldname, info in PARAM_INFO.items() if fieldname != "n"
)

DEFAULT_ORDER = ("IRP", "TfR1", "FPN1a", "Fe", "Ft")


@dataclass(frozen=True)
class ExperimentSetup:
    """The monitored experiment: constant input, cut to zero at a fixed time."""

    tf_sat: float = TF_SAT_REPLETE
    cutoff_time: float = 6 * 3600.0
    horizon: float = 48 * 3600.0
    rel_tol: float = DEFAULT_REL_TOL
    abs_tol: float = DEFAULT_ABS_TOL
    grid_dt: float = DEFAULT_GRID_DT

    def schedule(self) -> InputSchedule:
        if self.cutoff_time >= self.horizon:
            return InputSchedule(initial=self.tf_sat)
        return InputSchedule(
            initial=self.tf_sat, switches=((self.cutoff_time, 0.0),)
        )


def pin_parameters(p: ParameterSet) -> ParameterSet:
    """Apply the two pinning rules that make the parameter orderings hold.

    The ferritin regulation strength is recomputed as 0.97 times the
    ferritin production rate, and the ferroportin production/regulation pair
    is swapped if ordered the wrong way around.  Idempotent.
    """
    changes = {"kIRP_Ft": 0.97 * p.kFt_prod}
    if p.kFPN1a_prod < p.kIRP_FPN1a:
        changes["kFPN1a_prod"] = p.kIRP_FPN1a
        changes["kIRP_FPN1a"] = p.kFPN1a_prod
    return replace(p, **changes)


# --------------------------------------------------------------------------
# Ordered coordinate search for an initial valid parameter set


def _closed_form_value(var: str, v: dict, tf_sat: float) -> float:
    irp_loss = v["kIRP_deg"] + v["kFe_IRP"]
    if var == "IRP":
        return v["kIRP_prod"] / irp_loss if irp_loss > 0 else math.inf
    if var == "TfR1":
        irp = v["kIRP_prod"] / irp_loss if irp_loss > 0 else math.inf
        return (v["kTfR1_prod"] + v["kIRP_TfR1"] * irp) / v["kTfR1_deg"]
    if var == "FPN1a":
        return v["kFPN1a_prod"] / v["kFPN1a_deg"]
    if var == "Ft":
        return v["kFt_prod"] / v["kFt_deg"]
    if var == "Fe":
        irp = v["kIRP_prod"] / irp_loss if irp_loss > 0 else math.inf
        tfr1 = (v["kTfR1_prod"] + v["kIRP_TfR1"] * irp) / v["kTfR1_deg"]
        fpn1a = v["kFPN1a_prod"] / v["kFPN1a_deg"]
        denom = v["kFe_export"] * fpn1a + v["kFe_cons"]
        return tf_sat * v["kFe_input"] * tfr1 / denom if denom > 0 else math.inf
    raise FerrostatError(f"unknown variable {var!r}")


def _regime_ok_at(var: str, v: dict, value: float) -> bool:
    if var == "IRP":
        return value < v["thetaIRP_Ft"] and value < v["thetaIRP_FPN1a"]
    if var == "Fe":
        return value > v["thetaFe_IRP"]
    return True


def _candidate_grid(lo: float, hi: float, base: float, n: int) -> list:
    if hi <= 0.0:
        return [base]
    lo_eff = lo if lo > 0.0 else hi * 1e-9
    grid = np.geomspace(lo_eff, hi, n)
    cands = [base] if lo <= base <= hi else []
    cands.extend(float(g) for g in grid)
    return cands


def find_initial_params(
    bounds,
    targets,
    order=DEFAULT_ORDER,
    seed_params: ParameterSet | None = None,
    tf_sat: float = TF_SAT_REPLETE,
    grid_points: int = 7,
    max_nodes: int = 200_000,
) -> ParameterSet:
    """Ordered coordinate search for a parameter set hitting all targets.

    Walks the variables in ``order``; for each one, scans candidate values of
    its tuning group (log-spaced within ``bounds``) until the closed-form
    steady-state value lands in its ``targets`` interval, backtracking to the
    previous group when a later variable cannot be fixed.  Parameters outside
    every group (thresholds, the storage count) stay at the seed value or the
    geometric midpoint of their bounds.

    ``bounds`` and ``targets`` map formula-facing parameter names and
    variable names to (lo, hi) pairs (a Box works for either).
    """
    if sorted(order) != sorted(DEFAULT_ORDER):
        raise FerrostatError(f"order must permute {DEFAULT_ORDER}, got {order}")

    def pair(src, name):
        iv = src[name]
        return (iv.lo, iv.hi) if hasattr(iv, "lo") else (float(iv[0]), float(iv[1]))

    fbounds = {}
    for fieldname, (_, _, fname) in PARAM_INFO.items():
        if fieldname == "n":
            continue
        fbounds[fieldname] = pair(bounds, fname)

    base = {}
    for fieldname, (lo, hi) in fbounds.items():
        if seed_params is not None:
            base[fieldname] = getattr(seed_params, fieldname)
        else:
            lo_eff = lo if lo > 0.0 else hi * 1e-9
            base[fieldname] = math.sqrt(lo_eff * hi)
    base["n"] = seed_params.n if seed_params is not None else 30.0
    if base["nFt"] < 1.0:
        base["nFt"] = 1.0

    tpairs = {var: pair(targets, var) for var in DEFAULT_ORDER}

    def in_target(var, value):
        lo, hi = tpairs[var]
        return lo <= value <= hi and _regime_ok_at(var, assign, value)

    assign = dict(base)

    if seed_params is not None and all(
        in_target(var, _closed_form_value(var, assign, tf_sat)) for var in order
    ):
        return seed_params

    budget = [max_nodes]
    trace = [{"variable": var, "tried": 0} for var in order]

    def search(level: int) -> bool:
        if level == len(order):
            return True
        var = order[level]
        group = TUNING_GROUPS[var]
        grids = [
            _candidate_grid(*fbounds[f], base=base[f], n=grid_points) for f in group
        ]
        saved = {f: assign[f] for f in group}

        def combos(i):
            if i == len(group):
                yield ()
                return
            for value in grids[i]:
                for rest in combos(i + 1):
                    yield (value, *rest)

        for combo in combos(0):
            if budget[0] <= 0:
                return False
            budget[0] -= 1
            trace[level]["tried"] += 1
            for f, value in zip(group, combo):
                assign[f] = value
            value = _closed_form_value(var, assign, tf_sat)
            if in_target(var, value) and search(level + 1):
                return True
        assign.update(saved)
        return False

    if search(0):
        return ParameterSet(**assign)
    reason = "backtracking budget exhausted" if budget[0] <= 0 else "no candidate combination reaches the targets"
    raise NoValidPointError(
        f"no valid parameter set found: {reason}", search_trace=trace
    )


# --------------------------------------------------------------------------
# Sensitivity


@dataclass(frozen=True)
class SensitivityReport:
    """Normalized trajectory sensitivities over a time window.

    ``matrix[var][param]`` is the relative output change per relative
    parameter change, aggregated over the window grid times (``time_agg`` is
    ``"mean"`` or ``"max"``); ``aggregate[param]`` is the maximum over the
    five variables.  Entries that could not be computed (perturbed run
    failed) are recorded in ``flagged`` and absent from the matrix columns.
    """

    matrix: dict
    aggregate: dict
    window: tuple
    rel_step: float
    time_agg: str
    flagged: tuple = ()

    def to_json_dict(self) -> dict:
        return {
            "matrix": self.matrix,
            "aggregate": self.aggregate,
            "window_s": list(self.window),
            "relStep": self.rel_step,
            "timeAggregation": self.time_agg,
            "flagged": list(self.flagged),
            "units": {"sensitivity": "dimensionless"},
        }

    def to_csv(self) -> str:
        params = sorted(self.aggregate)
        lines = ["variable," + ",".join(params)]
        for var in sorted(self.matrix):
            row = [var]
            for p in params:
                v = self.matrix[var].get(p)
                row.append("" if v is None else f"{v:.12e}")
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def _grid_window(trace, t0, t1):
    mask = trace.on_grid & (trace.times >= t0) & (trace.times <= t1)
    return mask


def sensitivity(
    p: ParameterSet,
    window=(3 * 3600.0, 20 * 3600.0),
    rel_step: float = 0.01,
    setup: ExperimentSetup = ExperimentSetup(),
    time_agg: str = "mean",
    parameters=SENSITIVITY_PARAMETERS,
) -> SensitivityReport:
    """One-at-a-time finite-difference sensitivity on the cutoff experiment.

    Each parameter is scaled by (1 + rel_step).  A variable's deviation
    |perturbed(t) - base(t)| is normalized by its baseline level at the
    window start (the pre-cutoff steady level for the default window) and by
    ``rel_step``; normalizing against a fixed reference keeps the measure
    finite and first-order through the post-cutoff collapse, where the
    pointwise baseline goes to zero.  ``time_agg`` aggregates over the
    reporting-grid times in ``window`` ("mean" or "max").
    """
    if time_agg not in ("mean", "max"):
        raise FerrostatError(f"time_agg must be 'mean' or 'max', got {time_agg!r}")
    base_trace = _run_experiment(p, setup)
    base_mask = _grid_window(base_trace, *window)
    if not base_mask.any():
        raise FerrostatError("sensitivity window contains no grid samples")

    matrix: dict = {var: {} for var in base_trace.variables}
    aggregate: dict = {}
    flagged = []
    for fname in parameters:
        fieldname = FORMULA_NAMES[fname]
        perturbed = replace(p, **{fieldname: getattr(p, fieldname) * (1.0 + rel_step)})
        try:
            tr = _run_experiment(perturbed, setup)
        except FerrostatError:
            flagged.append(fname)
            continue
        # Internal step samples differ between runs; the reporting grid is
        # shared, so compare there.
        mask = _grid_window(tr, *window)
        best = 0.0
        for var in base_trace.variables:
            v0 = base_trace.column(var)[base_mask]
            v1 = tr.column(var)[mask]
            ref = abs(v0[0])
            if ref == 0.0:
                s = 0.0
            else:
                rel = np.abs(v1 - v0) / ref / rel_step
                s = float(rel.mean() if time_agg == "mean" else rel.max())
            matrix[var][fname] = s
            best = max(best, s)
        aggregate[fname] = best
    return SensitivityReport(
        matrix=matrix,
        aggregate=aggregate,
        window=tuple(window),
        rel_step=rel_step,
        time_agg=time_agg,
        flagged=tuple(flagged),
    )


def _run_experiment(p: ParameterSet, setup: ExperimentSetup):
    init = steady_state(p, setup.tf_sat).state
    return simulate(
        p,
        init,
        setup.schedule(),
        setup.horizon,
        rel_tol=setup.rel_tol,
        abs_tol=setup.abs_tol,
        grid_dt=setup.grid_dt,
    )


# --------------------------------------------------------------------------
# Monte-Carlo validation of a box


@dataclass(frozen=True)
class Counterexample:
    index: int
    params: dict
    failing: tuple
    robustness: dict | None

    def to_json_dict(self):
        return {
            "index": self.index,
            "params": self.params,
            "failing": list(self.failing),
            "robustness": self.robustness,
        }


@dataclass(frozen=True)
class ValidationReport:
    n_samples: int
    n_valid: int
    rng_seed: int
    counterexamples: tuple = ()

    @property
    def satisfied_fraction(self) -> float:
        return self.n_valid / self.n_samples if self.n_samples else 1.0

    def to_json_dict(self):
        return {
            "nSamples": self.n_samples,
            "nValid": self.n_valid,
            "satisfiedFraction": self.satisfied_fraction,
            "rngSeed": self.rng_seed,
            "counterexamples": [c.to_json_dict() for c in self.counterexamples],
        }


def sample_point(box: Box, center: ParameterSet, seed: int, index: int) -> ParameterSet:
    """The ``index``-th sample of the uniform product distribution on ``box``.

    Deterministic in (seed, index) alone, so evaluation order and worker
    scheduling cannot change what is sampled.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    changes = {}
    for fname in sorted(box.names()):
        iv = box[fname]
        value = float(rng.uniform(iv.lo, iv.hi)) if iv.width > 0.0 else iv.lo
        changes[FORMULA_NAMES[fname]] = value
    return center.replace(**changes)


def evaluate_candidate(p: ParameterSet, spec: IronSpec, setup: ExperimentSetup):
    """Pin, simulate the experiment and monitor the whole specification.

    Returns ``(ok, failing, rob)`` where ``failing`` names the violated
    conjuncts (``('phi_all',)`` when only the coupled conjunction fails) and
    ``rob`` maps them to robustness values at t = 0.
    """
    pinned = pin_parameters(p)
    try:
        trace = _run_experiment(pinned, setup)
    except (DegenerateParametersError, FerrostatError) as exc:
        return False, (f"{type(exc).__name__}",), None
    env = EvalEnvironment(trace, pinned.bindings())
    if eval_bool(spec.phi_all, env):
        return True, (), None
    failing = []
    rob = {}
    for name in spec.conjunct_names:
        f = spec.formula(name)
        if not eval_bool(f, env):
            failing.append(name)
            rob[name] = robustness(f, env)
    if not failing:
        failing = ["phi_all"]
        rob["phi_all"] = robustness(spec.phi_all, env)
    return False, tuple(failing), rob


_WORKER: dict = {}


def _worker_init(spec, setup):
    _WORKER["spec"] = spec
    _WORKER["setup"] = setup


def _worker_eval(args):
    index, params_dict = args
    p = ParameterSet(**params_dict)
    ok, failing, rob = evaluate_candidate(p, _WORKER["spec"], _WORKER["setup"])
    return index, ok, failing, rob


def validate_box(
    box: Box,
    center: ParameterSet,
    spec: IronSpec,
    n_samples: int,
    seed: int,
    setup: ExperimentSetup = ExperimentSetup(),
    n_jobs: int = 1,
) -> ValidationReport:
    """Check ``n_samples`` uniform samples of ``box`` against the spec.

    Pinned parameters are recomputed per sample, the closed-form stationary
    point is the initial condition, and the full experiment is monitored at
    t = 0.  Identical seeds give identical reports regardless of ``n_jobs``.
    """
    points = [
        (i, sample_point(box, center, seed, i).as_dict()) for i in range(n_samples)
    ]
    results = []
    if n_jobs > 1 and n_samples > 1:
        with ProcessPoolExecutor(
            max_workers=n_jobs, initializer=_worker_init, initargs=(spec, setup)
        ) as pool:
            results = list(pool.map(_worker_eval, points, chunksize=8))
    else:
        _worker_init(spec, setup)
        results = [_worker_eval(args) for args in points]

    results.sort(key=lambda r: r[0])
    counters = []
    n_valid = 0
    for index, ok, failing, rob in results:
        if ok:
            n_valid += 1
        else:
            counters.append(
                Counterexample(
                    index=index,
                    params=sample_point(box, center, seed, index).bindings(),
                    failing=failing,
                    robustness=rob,
                )
            )
    return ValidationReport(
        n_samples=n_samples,
        n_valid=n_valid,
        rng_seed=seed,
        counterexamples=tuple(counters),
    )


def replay_counterexample(
    box: Box,
    center: ParameterSet,
    spec: IronSpec,
    seed: int,
    index: int,
    setup: ExperimentSetup = ExperimentSetup(),
):
    """Re-evaluate one sample by its recorded (seed, index); returns
    ``(params, ok, failing, rob)``."""
    p = sample_point(box, center, seed, index)
    ok, failing, rob = evaluate_candidate(p, spec, setup)
    return p, ok, failing, rob


# --------------------------------------------------------------------------
# Region expansion


@dataclass(frozen=True)
class RobustRegion:
    center: dict
    box: Box
    half_widths_rel: dict
    frozen: tuple
    validation: ValidationReport
    rounds_used: int = 0

    def to_json_dict(self):
        return {
            "center": self.center,
            "box": self.box.as_dict(),
            "halfWidthsRel": self.half_widths_rel,
            "frozen": list(self.frozen),
            "validation": self.validation.to_json_dict(),
            "roundsUsed": self.rounds_used,
        }


def _box_from_widths(center: ParameterSet, widths: dict) -> Box:
    b = center.bindings()
    intervals = {}
    for fname, w in widths.items():
        c = b[fname]
        intervals[fname] = (max(0.0, c * (1.0 - w)), c * (1.0 + w))
    return Box(intervals)


def expand_box(
    center: ParameterSet,
    spec: IronSpec,
    sens: SensitivityReport | dict,
    samples_per_round: int = 500,
    max_rounds: int = 3,
    seed: int = 0,
    setup: ExperimentSetup = ExperimentSetup(),
    initial_half_width: float = 0.10,
    growth_c: float = 0.10,
    free_names=FREE_PARAMETERS,
    n_jobs: int = 1,
) -> RobustRegion:
    """Grow an axis-aligned region around ``center`` that stays valid.

    Round 1 validates a uniform ``initial_half_width`` box; every further
    round multiplies each unfrozen dimension's half-width by
    ``1 + growth_c / (1 + S_k)``, with ``S_k`` the dimension's sensitivity
    aggregate normalized to [0, 1] — low-sensitivity directions grow faster.
    A failing round rolls the offending dimensions (from per-conjunct
    attribution) back to the last validated widths and freezes them.  The
    returned region is the last box that passed a full validation round.
    """
    aggregates = sens.aggregate if isinstance(sens, SensitivityReport) else dict(sens)
    ok, failing, _ = evaluate_candidate(center, spec, setup)
    if not ok:
        raise SpecFalsifiedError(
            f"expansion center violates the specification ({', '.join(failing)})"
        )

    center_b = center.bindings()
    if max_rounds <= 0:
        degenerate = Box({f: (center_b[f], center_b[f]) for f in free_names})
        report = validate_box(
            degenerate, center, spec, samples_per_round, seed, setup, n_jobs
        )
        return RobustRegion(
            center=center_b,
            box=degenerate,
            half_widths_rel={f: 0.0 for f in free_names},
            frozen=(),
            validation=report,
            rounds_used=0,
        )

    s_max = max((aggregates.get(f, 0.0) for f in free_names), default=0.0)
    growth = {}
    for f in free_names:
        s_hat = aggregates.get(f, 0.0) / s_max if s_max > 0 else 0.0
        growth[f] = 1.0 + growth_c / (1.0 + s_hat)

    widths = {f: initial_half_width for f in free_names}
    frozen: set = set()
    last_valid_widths = None
    last_valid_report = None
    rounds = 0

    for round_idx in range(max_rounds):
        rounds += 1
        round_seed = int(
            np.random.SeedSequence(seed, spawn_key=(round_idx,)).generate_state(1)[0]
        )
        box = _box_from_widths(center, widths)
        report = validate_box(
            box, center, spec, samples_per_round, round_seed, setup, n_jobs
        )
        if report.satisfied_fraction == 1.0:
            last_valid_widths = dict(widths)
            last_valid_report = report
            if len(frozen) == len(widths) or round_idx == max_rounds - 1:
                break
            for f in widths:
                if f not in frozen:
                    widths[f] = widths[f] * growth[f]
        else:
            offending = set()
            for cex in report.counterexamples:
                for name in cex.failing:
                    offending |= set(spec.attribution.get(name, free_names))
            offending &= set(widths) - frozen
            if not offending:
                offending = set(widths) - frozen
            if last_valid_widths is None:
                # Even the seed box fails: collapse the offending dimensions
                # to the center and keep trying the rest.
                for f in offending:
                    widths[f] = 0.0
                    frozen.add(f)
            else:
                for f in offending:
                    widths[f] = last_valid_widths[f]
                    frozen.add(f)
            if len(frozen) == len(widths):
                break

    if last_valid_widths is None:
        final_widths = {f: 0.0 for f in free_names}
        final_box = _box_from_widths(center, final_widths)
        final_report = validate_box(
            final_box, center, spec, samples_per_round, seed, setup, n_jobs
        )
    elif widths != last_valid_widths:
        # Mixed growth after the last pass; re-validate before returning.
        final_box = _box_from_widths(center, widths)
        final_seed = int(
            np.random.SeedSequence(seed, spawn_key=(max_rounds,)).generate_state(1)[0]
        )
        final_report = validate_box(
            final_box, center, spec, samples_per_round, final_seed, setup, n_jobs
        )
        if final_report.satisfied_fraction == 1.0:
            final_widths = widths
        else:
            final_widths = last_valid_widths
            final_box = _box_from_widths(center, final_widths)
            final_report = last_valid_report
    else:
        final_widths = last_valid_widths
        final_box = _box_from_widths(center, final_widths)
        final_report = last_valid_report

    return RobustRegion(
        center=center_b,
        box=final_box,
        half_widths_rel=final_widths,
        frozen=tuple(sorted(frozen)),
        validation=final_report,
        rounds_used=rounds,
    )
