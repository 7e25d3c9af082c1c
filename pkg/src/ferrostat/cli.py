"""Command-line interface.

Commands: ``simulate``, ``monitor``, ``steady``, ``contract``,
``sensitivity``, ``explore``.  Exit codes: 0 success, 2 configuration
error, 3 numeric failure, 4 specification falsified.  Every JSON report
embeds the resolved configuration, its SHA-256 digest and the seed, so a
report can be reproduced from itself.  Output files are written atomically
(temp file + rename) into the output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .config import ProjectConfig, from_canonical, load_config
from .errors import (
    ConfigError,
    FerrostatError,
    IntegrationError,
    NoValidPointError,
    ParseError,
    SpecFalsifiedError,
)
from .explore import (
    FREE_PARAMETERS,
    evaluate_candidate,
    expand_box,
    pin_parameters,
    sensitivity,
    validate_box,
)
from .interval import (
    Box,
    build_iron_constraints,
    parse_box_file,
    parse_constraint_file,
    propagate,
)
from .interval.iron import PUBLISHED_DEDUCTIONS, contraction_report
from .simulate import simulate, trace_summary
from .steady import interaction_graph, steady_state
from .stl import EvalEnvironment, build_iron_spec, eval_bool, parse_formula_file, robustness
from .stl.nodes import format_formula

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_FALSIFIED = 4


def _write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(report: dict, config: ProjectConfig) -> str:
    report = dict(report)
    report["config"] = config.to_canonical()
    report["configSha256"] = config.digest()
    report["seed"] = config.seed
    return json.dumps(report, indent=2, sort_keys=True)


def _load_spec(config: ProjectConfig):
    if config.formula_file is None:
        return build_iron_spec()
    try:
        with open(config.formula_file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read formula file: {exc}") from exc
    named = parse_formula_file(text)
    from .stl.iron import IronSpec

    return IronSpec(
        formulas=named,
        sources={name: format_formula(f) for name, f in named.items()},
        conjunct_names=tuple(n for n in named if n != "phi_all"),
        attribution={},
    )


def cmd_simulate(config: ProjectConfig, out: Path, args) -> int:
    init = steady_state(config.params, config.schedule.initial).state
    trace = simulate(
        config.params,
        init,
        config.schedule,
        config.horizon,
        rel_tol=config.rel_tol,
        abs_tol=config.abs_tol,
        grid_dt=config.grid_dt,
    )
    _write_atomic(out / "trace.csv", trace.to_csv())
    cutoff = config.setup().cutoff_time
    summary = trace_summary(trace, cutoff) if config.horizon > 0 else {"samples": 1}
    _write_atomic(out / "simulate_summary.json", _dump(summary, config))
    print(f"wrote {out / 'trace.csv'} ({int(trace.on_grid.sum())} rows)")
    return EXIT_OK


def cmd_monitor(config: ProjectConfig, out: Path, args) -> int:
    spec = _load_spec(config)
    name = args.formula or "phi_all"
    formula = spec.formula(name)
    params = pin_parameters(config.params) if args.pin else config.params
    init = steady_state(params, config.schedule.initial).state
    trace = simulate(
        params,
        init,
        config.schedule,
        config.horizon,
        rel_tol=config.rel_tol,
        abs_tol=config.abs_tol,
        grid_dt=config.grid_dt,
    )
    env = EvalEnvironment(trace, params.bindings())
    ok = eval_bool(formula, env, 0.0)
    rob = robustness(formula, env, 0.0)
    per = {}
    for cname in spec.conjunct_names:
        f = spec.formula(cname)
        per[cname] = {
            "bool": eval_bool(f, env, 0.0),
            "robustness": robustness(f, env, 0.0),
        }
    report = {
        "formula": name,
        "source": spec.sources.get(name, format_formula(formula)),
        "t": 0.0,
        "bool": ok,
        "robustness": rob,
        "perConjunct": per,
        "pinned": bool(args.pin),
    }
    _write_atomic(out / "monitor.json", _dump(report, config))
    print(f"{name}: {'satisfied' if ok else 'FALSIFIED'} (robustness {rob:.6e})")
    return EXIT_OK if ok else EXIT_FALSIFIED


def cmd_steady(config: ProjectConfig, out: Path, args) -> int:
    ss = steady_state(config.params, config.schedule.initial)
    _write_atomic(out / "steady.json", _dump(ss.to_json_dict(), config))
    _write_atomic(
        out / "interaction_graph.txt", interaction_graph(config.params).to_edge_list()
    )
    print(
        f"steady state written; stable={ss.stable} regimeConsistent={ss.regime_consistent}"
    )
    return EXIT_OK


def cmd_contract(config: ProjectConfig, out: Path, args) -> int:
    if config.constraint_file is not None:
        try:
            with open(config.constraint_file, encoding="utf-8") as fh:
                constraints = parse_constraint_file(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read constraint file: {exc}") from exc
        _, box = build_iron_constraints(config.schedule.initial)
        box = box.updated(config.param_bounds)
        after = propagate(constraints, box)
        report = {
            "infeasible": after.is_empty,
            "dimensions": {
                n: {"before": [iv.lo, iv.hi], "after": [after[n].lo, after[n].hi]}
                for n, iv in box
            },
        }
    else:
        report = contraction_report(tf_sat=config.schedule.initial)
        matched = [d["name"] for d in report["deductions"] if d["matched"]]
        print(
            f"contraction matched {report['n_matched']}/{len(PUBLISHED_DEDUCTIONS)} "
            f"published deductions: {', '.join(matched)}"
        )
    _write_atomic(out / "contract.json", _dump(report, config))
    return EXIT_FALSIFIED if report["infeasible"] else EXIT_OK


def cmd_sensitivity(config: ProjectConfig, out: Path, args) -> int:
    rep = sensitivity(
        pin_parameters(config.params),
        window=config.window,
        rel_step=config.rel_step,
        setup=config.setup(),
    )
    _write_atomic(out / "sensitivity.csv", rep.to_csv())
    _write_atomic(out / "sensitivity.json", _dump(rep.to_json_dict(), config))
    top = sorted(rep.aggregate.items(), key=lambda kv: -kv[1])[:5]
    print("most sensitive:", ", ".join(f"{k}={v:.3g}" for k, v in top))
    return EXIT_OK


def cmd_explore(config: ProjectConfig, out: Path, args) -> int:
    spec = _load_spec(config)
    setup = config.setup()
    center = pin_parameters(config.params)
    sens = sensitivity(center, window=config.window, rel_step=config.rel_step, setup=setup)
    region = expand_box(
        center,
        spec,
        sens,
        samples_per_round=config.samples,
        max_rounds=config.rounds,
        seed=config.seed,
        setup=setup,
        n_jobs=config.jobs,
    )
    _write_atomic(out / "region.json", _dump(region.to_json_dict(), config))
    widths = region.half_widths_rel
    mean_w = sum(widths.values()) / len(widths) if widths else 0.0
    print(
        f"region: fraction={region.validation.satisfied_fraction} "
        f"mean half-width={mean_w:.3f} rounds={region.rounds_used}"
    )
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "monitor": cmd_monitor,
    "steady": cmd_steady,
    "contract": cmd_contract,
    "sensitivity": cmd_sensitivity,
    "explore": cmd_explore,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ferrostat",
        description="Explore ODE parameter spaces against temporal-logic specifications.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", help="YAML configuration file")
        p.add_argument("--seed", type=int, help="RNG seed (overrides config)")
        p.add_argument("--samples", type=int, help="samples per validation round")
        p.add_argument("--rounds", type=int, help="expansion rounds")
        p.add_argument("--jobs", type=int, help="parallel workers for sampling")
        p.add_argument("--out-dir", help="output directory (default ./out)")
        p.add_argument("--formula", help="formula name for monitor (default phi_all)")
        p.add_argument(
            "--no-pin",
            dest="pin",
            action="store_false",
            help="monitor without applying the pinning rules",
        )
        p.set_defaults(pin=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        seed_env = os.environ.get("FERROSTAT_SEED")
        overrides = {
            "seed": args.seed if args.seed is not None else (int(seed_env) if seed_env else None),
            "samples": args.samples,
            "rounds": args.rounds,
            "jobs": args.jobs,
        }
        config = load_config(args.config, overrides)
        out = Path(
            args.out_dir
            or os.environ.get("FERROSTAT_OUT_DIR")
            or "out"
        )
        return _COMMANDS[args.command](config, out, args)
    except (ConfigError, ParseError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, NoValidPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SpecFalsifiedError as exc:
        print(f"specification falsified: {exc}", file=sys.stderr)
        return EXIT_FALSIFIED
    except FerrostatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
