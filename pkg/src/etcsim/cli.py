"""Command line interface: simulate, advise, compare-baseline, sweep.

Exit codes: 0 success, 1 configuration/validation error, 2 numerical failure
(a diagnostic JSON is written in the latter case).  ETCSIM_THREADS caps sweep
parallelism.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .analysis import (
    AdvisorError,
    advise_parameters,
    invariance_check,
    lemma1_audit,
    trigger_statistics,
)
from .baseline import BaselineConfig, run_baseline
from .config import ConfigError, load_config
from .engine import EventStormError, SimConfig, run_simulation
from .exprlang import ExprError, parse_expr
from .reporting import (
    sha256_file,
    write_events_csv,
    write_json,
    write_manifest,
    write_trajectory_csv,
)
from .results import ED1, ED2, SimResult

__all__ = ["main"]


def _jsonable(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(float(v)) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return _jsonable(float(value))
    return value


def _summary_payload(result: SimResult, config: SimConfig) -> dict:
    stats = trigger_statistics(result.events)
    audit = lemma1_audit(result, config.thresholds, loc_tol=config.loc_tol)
    summary = result.summary
    payload = {
        "ed1": stats[ED1],
        "ed2": stats[ED2],
        "tail_sup_y": summary.tail_sup_y,
        "tail_window_start": result.samples[-1].t / 2.0,
        "V0": result.samples[0].V,
        "V_max": summary.V_max,
        "lemma1": audit,
        "zeno": {
            "ed1_min_gap": summary.ed1_min_gap,
            "ed2_min_gap": summary.ed2_min_gap,
            "loc_tol": config.loc_tol,
            "excluded": summary.ed1_min_gap >= config.loc_tol
            and summary.ed2_min_gap >= config.loc_tol,
        },
    }
    if config.q is not None:
        payload["invariance"] = invariance_check(result, config.q)
        payload["invariance_at_V0"] = invariance_check(result, result.samples[0].V)
    return _jsonable(payload)


def _load(args: argparse.Namespace, strict: bool = True) -> SimConfig:
    overrides = {}
    if getattr(args, "h", None) is not None:
        overrides["sim.h"] = args.h
    if getattr(args, "t_end", None) is not None:
        overrides["sim.t_end"] = args.t_end
    return load_config(args.config, overrides=overrides or None, strict=strict)


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_simulation(config)
    trajectory = out / "trajectory.csv"
    events = out / "events.csv"
    summary = out / "summary.json"
    write_trajectory_csv(trajectory, result, config.model.n)
    write_events_csv(events, result.events)
    write_json(summary, _summary_payload(result, config))
    write_manifest(out, args.config, "simulate", sys.argv[1:], [trajectory, events, summary])
    print(
        f"simulate: ed1={result.summary.ed1_count} ed2={result.summary.ed2_count} "
        f"tail_sup_y={result.summary.tail_sup_y:.6g} -> {out}"
    )
    return 0


def _cmd_advise(args: argparse.Namespace) -> int:
    config = _load(args, strict=False)
    q = args.q if args.q is not None else config.q
    if q is None:
        raise ConfigError("q must be given via --q or [analysis].q")
    report = advise_parameters(
        config.model,
        config.k,
        config.gains,
        config.thresholds,
        q,
        c_delta=args.c_delta,
        c_small_delta=args.c_small_delta,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = _jsonable(
        {
            "q": q,
            "c_delta": args.c_delta,
            "c_small_delta": args.c_small_delta,
            "A_c_hurwitz": report.A_c_hurwitz,
            "P": [list(row) for row in report.P.P],
            "lambda_min": report.P.lambda_min,
            "lambda_max": report.P.lambda_max,
            "lyapunov_residual": report.P.residual_norm,
            "constraints": [asdict(c) for c in report.constraint_results],
            "structural_ok": report.structural_ok,
            "suggested_delta": report.suggested_delta,
            "c_lower_bounds": list(report.c_lower_bounds),
            "c0_target": report.c0_target,
            "c_of_beta": report.c_of_beta,
            "q_floor": report.q_floor,
            "q_floor_at_c_delta": report.q_floor_at_c_delta,
        }
    )
    advisor = out / "advisor.json"
    write_json(advisor, payload)
    write_manifest(out, args.config, "advise", sys.argv[1:], [advisor])
    status = "all structural checks pass" if report.structural_ok else "structural check failures"
    print(f"advise: {status}; suggested delta={report.suggested_delta:.6g} -> {out}")
    return 0


def _cmd_compare_baseline(args: argparse.Namespace) -> int:
    config = _load(args)
    model = config.model
    reference = (parse_expr("cos(y)"), parse_expr("y+1"))
    if model.n != 2 or tuple(p.ast for p in model.psi) != tuple(p.ast for p in reference):
        raise ConfigError(
            "compare-baseline supports only the n=2 study system with psi = (cos(y), y+1)"
        )
    ours = run_simulation(config)
    baseline = run_baseline(
        BaselineConfig(
            x0=(float(config.x0[0]), float(config.x0[1])),
            theta_hat0=config.theta_hat0,
            theta_true=model.theta_true,
            h=config.h,
            t_end=config.t_end,
        )
    )
    tail_ours = ours.summary.tail_sup_y
    tail_base = baseline.result.summary.tail_sup_y
    ratio = max(tail_ours, tail_base) / min(tail_ours, tail_base) if min(tail_ours, tail_base) > 0 else math.inf
    payload = _jsonable(
        {
            "ours": {
                "controller_to_plant": ours.summary.ed2_count,
                "plant_to_controller": ours.summary.ed1_count,
                "tail_sup_y": tail_ours,
            },
            "baseline": {
                "controller_to_plant": baseline.controller_to_plant,
                "plant_to_controller": baseline.plant_to_controller,
                "tail_sup_y": tail_base,
            },
            "tail_ratio": ratio,
        }
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    comparison = out / "comparison.json"
    write_json(comparison, payload)
    write_manifest(out, args.config, "compare-baseline", sys.argv[1:], [comparison])
    print(
        f"compare-baseline: ours c2p={ours.summary.ed2_count} p2c={ours.summary.ed1_count}; "
        f"baseline c2p={baseline.controller_to_plant} p2c={baseline.plant_to_controller}; "
        f"tail ratio={ratio:.3g} -> {out}"
    )
    return 0


def _sweep_points(spec: dict) -> list[dict]:
    if "points" in spec:
        points = spec["points"]
        if not isinstance(points, list) or not points:
            raise ConfigError("sweep spec: points must be a non-empty array of override tables")
        return [dict(p) for p in points]
    if "grid" in spec:
        grid = spec["grid"]
        if not isinstance(grid, dict) or not grid:
            raise ConfigError("sweep spec: grid must be a non-empty table of path -> values")
        names = list(grid.keys())
        values = [grid[name] for name in names]
        if any(not isinstance(v, list) or not v for v in values):
            raise ConfigError("sweep spec: every grid entry must be a non-empty array")
        return [dict(zip(names, combo)) for combo in itertools.product(*values)]
    raise ConfigError("sweep spec must contain 'points' or 'grid'")


def _sweep_worker(task: tuple[str, dict]) -> tuple:
    config_path, overrides = task
    config = load_config(config_path, overrides=overrides)
    result = run_simulation(config)
    s = result.summary
    return (
        s.ed1_count,
        s.ed2_count,
        s.ed1_min_gap,
        s.ed2_min_gap,
        s.tail_sup_y,
        s.V_max,
        s.lemma1_max_error,
    )


def _cmd_sweep(args: argparse.Namespace) -> int:
    with open(args.sweep) as fh:
        spec = json.load(fh)
    points = _sweep_points(spec)
    # fail fast on bad paths / values before launching workers
    for overrides in points:
        load_config(args.config, overrides=overrides)

    tasks = [(args.config, overrides) for overrides in points]
    env_cap = os.environ.get("ETCSIM_THREADS")
    workers = min(len(tasks), os.cpu_count() or 1)
    if env_cap is not None:
        workers = max(1, min(workers, int(env_cap)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_worker, tasks))
    else:
        rows = [_sweep_worker(task) for task in tasks]

    param_names = sorted({name for overrides in points for name in overrides})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sweep_csv = out / "sweep.csv"
    from .reporting import fmt

    with open(sweep_csv, "w", newline="") as fh:
        import csv as _csv

        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["index", *param_names, "ed1_count", "ed2_count", "ed1_min_gap",
             "ed2_min_gap", "tail_sup_y", "V_max", "lemma1_max_error"]
        )
        for i, (overrides, row) in enumerate(zip(points, rows)):
            cells = [str(i)]
            cells += [
                fmt(float(overrides[name])) if name in overrides else "" for name in param_names
            ]
            cells += [str(row[0]), str(row[1])]
            cells += [fmt(v) for v in row[2:]]
            writer.writerow(cells)
    write_manifest(out, args.config, "sweep", sys.argv[1:], [sweep_csv])
    print(f"sweep: {len(points)} points -> {sweep_csv}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="etcsim",
        description="Event-triggered adaptive output-feedback control simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, out_required: bool = True) -> None:
        p.add_argument("--config", required=True, help="path to the TOML configuration")
        p.add_argument("--out", required=out_required, help="output directory")

    p_sim = sub.add_parser("simulate", help="run one closed-loop simulation")
    common(p_sim)
    p_sim.add_argument("--h", type=float, help="override the base step")
    p_sim.add_argument("--t-end", dest="t_end", type=float, help="override the horizon")

    p_adv = sub.add_parser("advise", help="audit controller parameters")
    common(p_adv)
    p_adv.add_argument("--q", type=float, help="invariant-set level (default: [analysis].q)")
    p_adv.add_argument("--c-delta", dest="c_delta", type=float, default=0.1)
    p_adv.add_argument(
        "--c-small-delta", dest="c_small_delta", type=float, default=1.1
    )

    p_cmp = sub.add_parser("compare-baseline", help="run both loops on the study system")
    common(p_cmp)
    p_cmp.add_argument("--h", type=float, help="override the base step")
    p_cmp.add_argument("--t-end", dest="t_end", type=float, help="override the horizon")

    p_swp = sub.add_parser("sweep", help="run a parameter grid")
    common(p_swp)
    p_swp.add_argument("--sweep", required=True, help="JSON sweep spec (points or grid)")
    return parser


_COMMANDS = {
    "simulate": _cmd_simulate,
    "advise": _cmd_advise,
    "compare-baseline": _cmd_compare_baseline,
    "sweep": _cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ExprError, AdvisorError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FloatingPointError, EventStormError) as exc:
        out = Path(getattr(args, "out", ".") or ".")
        out.mkdir(parents=True, exist_ok=True)
        diagnostic = out / "diagnostic.json"
        write_json(diagnostic, {"error": str(exc), "type": type(exc).__name__})
        print(f"numerical failure: {exc} (diagnostic at {diagnostic})", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
