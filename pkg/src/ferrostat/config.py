"""Project configuration: YAML with explicit units, canonicalized to s and mol/L.

A value may be a bare number (already in canonical units) or a string
``"<number> <unit>"``.  Supported units: times (s, min, h), first-order
rates (1/s, 1/min, 1/h), concentrations (mol/L and SI-prefixed variants,
plus the M shorthand), zeroth-order rates (<conc>/<time>), second-order
rates (L/mol/<time>), and dimensionless ``1``.  Anything else (source-paper
units like pg/cell/min need cell geometry to convert) is rejected with a
:class:`ConfigError`; every applied conversion is logged.

Parameters are keyed by their formula-facing names.  Each may be given as a
point value or as a ``{lo, hi}`` box, never both; commands that need point
values fall back to the built-in reference set for parameters given as
boxes or omitted, and the contraction box falls back to the built-in search
intervals.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass

import yaml

from .errors import ConfigError
from .explore import ExperimentSetup
from .model import (
    FORMULA_NAMES,
    P0,
    PARAM_BOUNDS,
    PARAM_INFO,
    InputSchedule,
    ParameterSet,
)
from .simulate import DEFAULT_ABS_TOL, DEFAULT_GRID_DT, DEFAULT_REL_TOL

log = logging.getLogger(__name__)

_TIME_FACTORS = {
    "s": 1.0,
    "sec": 1.0,
    "second": 1.0,
    "seconds": 1.0,
    "min": 60.0,
    "h": 3600.0,
    "hr": 3600.0,
    "hour": 3600.0,
    "hours": 3600.0,
}
_PREFIX = {"": 1.0, "m": 1e-3, "u": 1e-6, "µ": 1e-6, "n": 1e-9, "p": 1e-12}

_CONC_RE = re.compile(r"^(?P<p>[mupnµ]?)(?:mol/L|M)$")
_VALUE_RE = re.compile(r"^\s*(?P<num>[^ ]+)\s*(?P<unit>.*?)\s*$")


def _conc_factor(unit: str):
    m = _CONC_RE.match(unit)
    if m is None:
        return None
    return _PREFIX[m.group("p")]


def parse_unit(unit: str):
    """Return (kind, factor) with kind in {time, 1/time, conc, conc/time,
    L/mol/time, 1}."""
    unit = unit.strip()
    if unit in ("", "1", "-", "dimensionless"):
        return "1", 1.0
    if unit in _TIME_FACTORS:
        return "time", _TIME_FACTORS[unit]
    parts = unit.split("/")
    if len(parts) == 2 and parts[0] == "1" and parts[1] in _TIME_FACTORS:
        return "1/s", 1.0 / _TIME_FACTORS[parts[1]]
    conc = _conc_factor(unit)
    if conc is not None:
        return "mol/L", conc
    if len(parts) >= 2 and parts[-1] in _TIME_FACTORS:
        head = "/".join(parts[:-1])
        conc = _conc_factor(head)
        if conc is not None:
            return "mol/L/s", conc / _TIME_FACTORS[parts[-1]]
        m = re.match(r"^L/(?P<p>[mupnµ]?)mol$", head)
        if m is not None:
            return "L/mol/s", (1.0 / _PREFIX[m.group("p")]) / _TIME_FACTORS[parts[-1]]
    raise ConfigError(f"unsupported unit {unit!r}")


def parse_quantity(value, expected_kind: str, context: str = "") -> float:
    """Convert a number or ``"number unit"`` string to canonical units."""
    if isinstance(value, bool):
        raise ConfigError(f"{context}: expected a quantity, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{context}: expected a number or 'number unit' string")
    m = _VALUE_RE.match(value)
    try:
        num = float(m.group("num"))
    except (ValueError, AttributeError):
        raise ConfigError(f"{context}: cannot parse quantity {value!r}") from None
    kind, factor = parse_unit(m.group("unit"))
    if kind == "time" and expected_kind == "time":
        pass
    elif kind != expected_kind and kind != "1":
        raise ConfigError(
            f"{context}: unit {m.group('unit')!r} has kind {kind}, expected {expected_kind}"
        )
    out = num * factor
    if factor != 1.0:
        log.info("converted %s: %s -> %r %s", context, value, out, expected_kind)
    return out


_EXPLORATION_DEFAULTS = {
    "seed": 0,
    "samples": 500,
    "rounds": 3,
    "window": [3 * 3600.0, 20 * 3600.0],
    "rel_step": 0.01,
    "jobs": 1,
}


@dataclass(frozen=True)
class ProjectConfig:
    """Fully resolved configuration in canonical units."""

    params: ParameterSet
    param_bounds: dict
    schedule: InputSchedule
    horizon: float
    rel_tol: float
    abs_tol: float
    grid_dt: float
    formula_file: str | None
    constraint_file: str | None
    seed: int
    samples: int
    rounds: int
    window: tuple
    rel_step: float
    jobs: int

    def setup(self) -> ExperimentSetup:
        switches = self.schedule.switches
        cutoff = switches[0][0] if switches else self.horizon
        return ExperimentSetup(
            tf_sat=self.schedule.initial,
            cutoff_time=cutoff,
            horizon=self.horizon,
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            grid_dt=self.grid_dt,
        )

    def to_canonical(self) -> dict:
        return {
            "parameters": self.params.bindings(),
            "parameter_bounds": {k: list(v) for k, v in sorted(self.param_bounds.items())},
            "schedule": {
                "initial": self.schedule.initial,
                "switches": [list(sw) for sw in self.schedule.switches],
            },
            "simulation": {
                "horizon": self.horizon,
                "rel_tol": self.rel_tol,
                "abs_tol": self.abs_tol,
                "grid_dt": self.grid_dt,
            },
            "files": {"formulas": self.formula_file, "constraints": self.constraint_file},
            "exploration": {
                "seed": self.seed,
                "samples": self.samples,
                "rounds": self.rounds,
                "window": list(self.window),
                "rel_step": self.rel_step,
                "jobs": self.jobs,
            },
        }

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_canonical(), sort_keys=True).encode()
        ).hexdigest()


def default_param_bounds() -> dict:
    return {PARAM_INFO[f][2]: tuple(pair) for f, pair in PARAM_BOUNDS.items()}


def from_canonical(raw: dict) -> ProjectConfig:
    """Build a config from an already-canonical dict (as embedded in reports)."""
    params = dict(P0.bindings())
    params.update(raw.get("parameters", {}))
    pset = ParameterSet(**{FORMULA_NAMES[k]: float(v) for k, v in params.items()})

    bounds = default_param_bounds()
    for k, v in raw.get("parameter_bounds", {}).items():
        if k not in bounds:
            raise ConfigError(f"unknown parameter in bounds: {k!r}")
        bounds[k] = (float(v[0]), float(v[1]))

    sched_raw = raw.get("schedule", {})
    schedule = InputSchedule(
        initial=float(sched_raw.get("initial", 0.3)),
        switches=tuple(
            (float(t), float(v)) for t, v in sched_raw.get("switches", ())
        ),
    )
    sim = raw.get("simulation", {})
    files = raw.get("files", {})
    exp = {**_EXPLORATION_DEFAULTS, **raw.get("exploration", {})}
    window = exp["window"]
    return ProjectConfig(
        params=pset,
        param_bounds=bounds,
        schedule=schedule,
        horizon=float(sim.get("horizon", 48 * 3600.0)),
        rel_tol=float(sim.get("rel_tol", DEFAULT_REL_TOL)),
        abs_tol=float(sim.get("abs_tol", DEFAULT_ABS_TOL)),
        grid_dt=float(sim.get("grid_dt", DEFAULT_GRID_DT)),
        formula_file=files.get("formulas"),
        constraint_file=files.get("constraints"),
        seed=int(exp["seed"]),
        samples=int(exp["samples"]),
        rounds=int(exp["rounds"]),
        window=(float(window[0]), float(window[1])),
        rel_step=float(exp["rel_step"]),
        jobs=int(exp["jobs"]),
    )


def load_config(path: str | None = None, overrides: dict | None = None) -> ProjectConfig:
    """Load a YAML config file (or the built-in defaults) and apply overrides.

    Overrides use canonical keys: seed, samples, rounds, jobs.
    """
    raw: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                data = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config root must be a mapping, got {type(data).__name__}")
        raw = _canonicalize_user_config(data)
    if overrides:
        exp = raw.setdefault("exploration", {})
        for key in ("seed", "samples", "rounds", "jobs"):
            if overrides.get(key) is not None:
                exp[key] = overrides[key]
    return from_canonical(raw)


def _canonicalize_user_config(data: dict) -> dict:
    known = {
        "parameters",
        "schedule",
        "simulation",
        "formulas",
        "constraints",
        "exploration",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    points: dict = {}
    bounds: dict = {}
    for name, value in (data.get("parameters") or {}).items():
        if name not in FORMULA_NAMES:
            raise ConfigError(f"unknown parameter {name!r}")
        kind = PARAM_INFO[FORMULA_NAMES[name]][1]
        kind = {"1/s": "1/s", "mol/L/s": "mol/L/s", "mol/L": "mol/L", "L/mol/s": "L/mol/s", "1": "1"}[kind]
        if isinstance(value, dict):
            extra = set(value) - {"lo", "hi"}
            if extra or set(value) != {"lo", "hi"}:
                raise ConfigError(
                    f"parameter {name!r}: a box needs exactly lo and hi"
                )
            bounds[name] = [
                parse_quantity(value["lo"], kind, f"parameters.{name}.lo"),
                parse_quantity(value["hi"], kind, f"parameters.{name}.hi"),
            ]
        else:
            points[name] = parse_quantity(value, kind, f"parameters.{name}")

    raw: dict = {}
    if points:
        raw["parameters"] = points
    if bounds:
        raw["parameter_bounds"] = bounds

    sched = data.get("schedule")
    if sched is not None:
        switches = []
        for entry in sched.get("switches", ()):
            switches.append(
                [
                    parse_quantity(entry["time"], "time", "schedule.switches.time"),
                    float(entry["value"]),
                ]
            )
        raw["schedule"] = {
            "initial": float(sched.get("initial", 0.3)),
            "switches": switches,
        }

    sim = data.get("simulation")
    if sim is not None:
        out = {}
        if "horizon" in sim:
            out["horizon"] = parse_quantity(sim["horizon"], "time", "simulation.horizon")
        if "grid_dt" in sim:
            out["grid_dt"] = parse_quantity(sim["grid_dt"], "time", "simulation.grid_dt")
        for key in ("rel_tol", "abs_tol"):
            if key in sim:
                out[key] = float(sim[key])
        raw["simulation"] = out

    files = {}
    for key in ("formulas", "constraints"):
        if data.get(key) is not None:
            files[key] = str(data[key])
    if files:
        raw["files"] = {"formulas": files.get("formulas"), "constraints": files.get("constraints")}

    exp = data.get("exploration")
    if exp is not None:
        out = {}
        for key in ("seed", "samples", "rounds", "jobs"):
            if key in exp:
                out[key] = int(exp[key])
        if "rel_step" in exp:
            out["rel_step"] = float(exp["rel_step"])
        if "window" in exp:
            w = exp["window"]
            out["window"] = [
                parse_quantity(w[0], "time", "exploration.window[0]"),
                parse_quantity(w[1], "time", "exploration.window[1]"),
            ]
        raw["exploration"] = out
    return raw
