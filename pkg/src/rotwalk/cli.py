"""Command line interface: simulate, ensemble, langevin, analyze.

Exit codes: 0 on success (and, for analyze, when every requested
deterministic check passes), 1 on runtime failures (solver breakdown,
corrupted inputs, failed deterministic checks), 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import importlib.util
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, analysis
from .dynamics import SimConfig, SimulationError, run_trajectory
from .events_io import EventWriter, file_digest, read_events, read_header, write_json
from .geometry import radial_distance
from .langevin import LangevinConfig, compare_growth, integrate
from .sampling import derive_stream

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

_ALL_CHECKS = (
    "lemma1",
    "prop1",
    "timebounds",
    "radial-profile",
    "growth",
    "cramer",
    "compare",
)
#: checks whose failure is deterministic evidence and drives the exit code
_DETERMINISTIC_CHECKS = frozenset({"lemma1"})

_TIMEBOUND_THRESHOLDS = (10.0, 100.0, 1000.0, 10000.0)

#: fixed binning for ensemble aggregates, so partials always merge
_AGG_EDGES = analysis.geometric_edges(1e-3, 1e8, 110)

#: cap on rows written to trajectory.csv
_MAX_CSV_ROWS = 100_000


class _UsageError(ValueError):
    pass


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _parse_seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(
            "seed must be a 64-bit unsigned integer"
        ) from None


def _set_path(tree: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = tree
    for part in parts[:-1]:
        child = node.get(part)
        if not isinstance(child, dict):
            child = {}
            node[part] = child
        node = child
    node[parts[-1]] = value


def _load_config(args) -> dict:
    raw: dict = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise _UsageError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise _UsageError(f"{args.config}: invalid JSON ({exc.msg})") from None
        if not isinstance(raw, dict):
            raise _UsageError(f"{args.config}: config must be a JSON object")
    for item in args.overrides:
        key, sep, text = item.partition("=")
        if not sep or not key:
            raise _UsageError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        _set_path(raw, key, value)
    if args.seed is not None:
        raw["seed"] = args.seed
    return raw


def _resolve_workers(args) -> int:
    if args.workers is not None:
        workers = args.workers
    else:
        text = os.environ.get("ROTWALK_WORKERS", "1")
        try:
            workers = int(text)
        except ValueError:
            raise _UsageError("ROTWALK_WORKERS must be a positive integer") from None
    if workers < 1:
        raise _UsageError("workers must be a positive integer")
    return workers


def _ensure_outdir(text: str) -> Path:
    outdir = Path(text)
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _write_manifest(
    outdir: Path,
    command: str,
    config: dict,
    seed: int,
    started: str,
    outputs: Sequence[Path],
    **extra,
) -> Path:
    doc = {
        "format": "rotwalk-manifest",
        "version": 1,
        "command": command,
        "tool_version": __version__,
        "config": config,
        "seed": seed,
        "started_at": started,
        "finished_at": _utc_now(),
    }
    doc.update(extra)
    doc["outputs"] = {p.name: file_digest(p) for p in outputs}
    path = outdir / "manifest.json"
    write_json(path, doc)
    return path


def cmd_simulate(args) -> int:
    started = _utc_now()
    try:
        config = SimConfig.from_dict(_load_config(args))
        outdir = _ensure_outdir(args.out)
    except ValueError as exc:
        print(f"rotwalk simulate: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    events_path = outdir / "events.jsonl"
    writer = EventWriter(events_path, config.to_dict(), trajectory_index=0)
    try:
        summary = run_trajectory(config, derive_stream(config.seed, 0), writer)
    except SimulationError as exc:
        print(f"rotwalk simulate: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    finally:
        writer.close()
    _write_manifest(
        outdir,
        "simulate",
        config.to_dict(),
        config.seed,
        started,
        [events_path],
        stop_reason=summary.stop_reason,
        events=summary.events,
    )
    print(f"simulate: {summary.events} events (stop: {summary.stop_reason}) -> {events_path}")
    return EXIT_OK


def _ensemble_worker(payload) -> Tuple[int, dict]:
    config_dict, index, path = payload
    config = SimConfig.from_dict(config_dict)
    rng = derive_stream(config.seed, index)
    cols = analysis.TrajectoryColumns()
    if path is None:
        summary = run_trajectory(config, rng, cols)
    else:
        writer = EventWriter(path, config_dict, trajectory_index=index)
        try:
            def tee(ev):
                writer(ev)
                cols(ev)

            summary = run_trajectory(config, rng, tee)
        finally:
            writer.close()
    return index, {
        "events": summary.events,
        "stop_reason": summary.stop_reason,
        "final_radius": radial_distance(summary.final_state.x),
        "e_norm": np.array(cols.e_norm),
        "profile": analysis.radial_velocity_profile(cols, _AGG_EDGES),
    }


def _merge_partials(parts: List[dict]):
    max_k = max(p["e_norm"].size for p in parts)
    e_sum = np.zeros(max_k)
    e_sumsq = np.zeros(max_k)
    counts = np.zeros(max_k, dtype=np.int64)
    profile = analysis.RadialBinStats(_AGG_EDGES)
    per = {"events": [], "stop_reason": [], "final_radius": []}
    for p in parts:
        en = p["e_norm"]
        e_sum[: en.size] += en
        e_sumsq[: en.size] += en * en
        counts[: en.size] += 1
        profile.merge(p["profile"])
        per["events"].append(int(p["events"]))
        per["stop_reason"].append(p["stop_reason"])
        per["final_radius"].append(float(p["final_radius"]))
    return e_sum, e_sumsq, counts, profile, per


def cmd_ensemble(args) -> int:
    started = _utc_now()
    try:
        config = SimConfig.from_dict(_load_config(args))
        if args.trajectories < 1:
            raise _UsageError("trajectories must be a positive integer")
        workers = _resolve_workers(args)
        outdir = _ensure_outdir(args.out)
    except ValueError as exc:
        print(f"rotwalk ensemble: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    n = args.trajectories
    config_dict = config.to_dict()
    payloads = []
    event_paths: List[Path] = []
    for i in range(n):
        if args.aggregate_only:
            path = None
        else:
            path = outdir / f"traj-{i:04d}.events.jsonl"
            event_paths.append(path)
        payloads.append((config_dict, i, None if path is None else str(path)))
    try:
        if workers <= 1 or n == 1:
            results = [_ensemble_worker(p) for p in payloads]
        else:
            with ProcessPoolExecutor(max_workers=min(workers, n)) as pool:
                results = list(pool.map(_ensemble_worker, payloads))
    except SimulationError as exc:
        print(f"rotwalk ensemble: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    # Partials are reduced in trajectory order whatever the worker layout,
    # so the aggregate is byte-identical for any --workers value.
    results.sort(key=lambda item: item[0])
    e_sum, e_sumsq, counts, profile, per = _merge_partials([r for _, r in results])
    total = int(sum(per["events"]))
    aggregate = {
        "format": "rotwalk-aggregate",
        "version": 1,
        "trajectories": n,
        "events": total,
        "per_k": {
            "count": [int(v) for v in counts],
            "e_sum": [float(v) for v in e_sum],
            "e_sumsq": [float(v) for v in e_sumsq],
        },
        "radial_profile": profile.to_dict(),
        "per_trajectory": per,
    }
    agg_path = outdir / "aggregate.json"
    write_json(agg_path, aggregate)
    _write_manifest(
        outdir,
        "ensemble",
        config_dict,
        config.seed,
        started,
        [agg_path, *event_paths],
        trajectories=n,
        events=total,
        workers=workers,
    )
    print(f"ensemble: {n} trajectories, {total} events -> {outdir}")
    return EXIT_OK


def cmd_langevin(args) -> int:
    started = _utc_now()
    try:
        config = LangevinConfig.from_dict(_load_config(args))
        outdir = _ensure_outdir(args.out)
    except ValueError as exc:
        print(f"rotwalk langevin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rows: List = []
    summary = integrate(config, derive_stream(config.seed, 0), rows.append)
    samples_path = outdir / "samples.csv"
    with open(samples_path, "w", encoding="utf-8") as fh:
        fh.write("t,x1,x2\n")
        for t, (x1, x2) in rows:
            fh.write(f"{t!r},{x1!r},{x2!r}\n")
    _write_manifest(
        outdir,
        "langevin",
        config.to_dict(),
        config.seed,
        started,
        [samples_path],
        steps=summary.steps,
        t_final=summary.t_final,
    )
    print(f"langevin: {summary.steps} steps to t={summary.t_final:g} -> {samples_path}")
    return EXIT_OK


def _parse_checks(text: str) -> List[str]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    if not names:
        raise _UsageError("--checks must name at least one check")
    for name in names:
        if name not in _ALL_CHECKS:
            raise _UsageError(f"unknown check: {name}")
    return [name for name in _ALL_CHECKS if name in names]


def _read_samples_csv(path: Path) -> List[Tuple[float, float, float]]:
    rows: List[Tuple[float, float, float]] = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            if i == 0 and row[0].strip().lower() == "t":
                continue
            try:
                t, x1, x2 = (float(c) for c in row)
            except ValueError:
                raise ValueError(f"{path}: record {i}: expected t,x1,x2") from None
            rows.append((t, x1, x2))
    return rows


def _load_columns(path: Path) -> analysis.TrajectoryColumns:
    cols = analysis.TrajectoryColumns()
    for ev in read_events(path):
        cols(ev)
    return cols


def _profile_edges(max_radius: float) -> np.ndarray:
    lo = analysis.DEFAULT_BURN_IN_RADIUS
    hi = max(max_radius, lo * 10.0)
    n_bins = max(int(round(8.0 * math.log10(hi / lo))), 2)
    return analysis.geometric_edges(lo, hi, n_bins)


def cmd_analyze(args) -> int:
    try:
        checks = _parse_checks(args.checks)
        if "compare" in checks and not args.langevin:
            raise _UsageError("--langevin is required for the compare check")
        if args.svg and importlib.util.find_spec("matplotlib") is None:
            raise _UsageError("--svg requires matplotlib (install rotwalk[plot])")
        paths = [Path(p) for p in args.inputs]
        for p in paths:
            if not p.exists():
                raise _UsageError(f"no such file: {p}")
        if args.langevin and not Path(args.langevin).exists():
            raise _UsageError(f"no such file: {args.langevin}")
        outdir = _ensure_outdir(args.out)
    except ValueError as exc:
        print(f"rotwalk analyze: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        headers = [read_header(p) for p in paths]
        col_list = [_load_columns(p) for p in paths]
        config = SimConfig.from_dict(headers[0]["config"])
        samples = _read_samples_csv(Path(args.langevin)) if args.langevin else None
    except (ValueError, KeyError, OSError) as exc:
        print(f"rotwalk analyze: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    lines: List[str] = []
    failed_runtime = False
    failed_deterministic = False

    def emit(name: str, passed: bool, detail: str, report: dict) -> None:
        nonlocal failed_deterministic
        verdict = "PASS" if passed else "FAIL"
        lines.append(f"{verdict} {name}: {detail}")
        if not passed and name in _DETERMINISTIC_CHECKS:
            failed_deterministic = True
        write_json(outdir / f"report-{name}.json", report)

    for name in checks:
        try:
            if name == "lemma1":
                reports = [
                    analysis.check_lemma1(cols, omega=config.omega) for cols in col_list
                ]
                pairs = int(sum(r.count for r in reports))
                violations = int(
                    sum(round(r.violation_fraction * r.count) for r in reports)
                )
                fraction = violations / pairs if pairs else 0.0
                max_excess = max((r.max_violation for r in reports), default=0.0)
                passed = all(r.passed for r in reports)
                emit(
                    name,
                    passed,
                    f"violation fraction {fraction:.6g} over {pairs} pairs "
                    f"(max excess {max_excess:.6g})",
                    {
                        "check": name,
                        "passed": passed,
                        "pairs": pairs,
                        "violation_fraction": fraction,
                        "max_excess": max_excess,
                        "per_file": [
                            {"file": str(p), **r.summary()}
                            for p, r in zip(paths, reports)
                        ],
                    },
                )
            elif name == "prop1":
                report = analysis.check_fluctuation_bound(col_list, config)
                emit(
                    name,
                    report.passed,
                    f"mean error norm vs bound over {len(col_list)} trajectories: "
                    f"violation fraction {report.violation_fraction:.6g}, "
                    f"max excess {report.max_violation:.6g}"
                    + (f" [{'; '.join(report.warnings)}]" if report.warnings else ""),
                    {
                        "check": name,
                        "passed": report.passed,
                        "violation_fraction": report.violation_fraction,
                        "max_excess": report.max_violation,
                        "warnings": list(report.warnings),
                        "k": [float(v) for v in report.x],
                        "observed": [float(v) for v in report.observed],
                        "bound": [float(v) for v in report.bound],
                        "half_width": [float(v) for v in report.half_width],
                    },
                )
            elif name == "timebounds":
                thresholds = np.asarray(_TIMEBOUND_THRESHOLDS)
                reports = [
                    analysis.check_collision_time_bounds(
                        cols, thresholds, omega=config.omega
                    )
                    for cols in col_list
                ]
                counts = np.sum([r.count for r in reports], axis=0)
                viol = np.sum(
                    [np.round(r.observed * r.count) for r in reports], axis=0
                )
                fractions = np.where(counts > 0, viol / np.maximum(counts, 1), 0.0)
                passed = not bool(fractions.any())
                detail = ", ".join(
                    f"d_r>{thr:g}: {frac:.4g} ({int(cnt)})"
                    for thr, frac, cnt in zip(thresholds, fractions, counts)
                )
                emit(
                    name,
                    passed,
                    f"flight-time bracket violations by threshold: {detail}",
                    {
                        "check": name,
                        "passed": passed,
                        "thresholds": [float(v) for v in thresholds],
                        "violation_fraction": [float(v) for v in fractions],
                        "count": [int(v) for v in counts],
                    },
                )
            elif name == "radial-profile":
                max_radius = max(float(cols.dr.max()) for cols in col_list if len(cols))
                edges = _profile_edges(max_radius)
                profile = analysis.RadialBinStats(edges)
                for cols in col_list:
                    profile.merge(analysis.radial_velocity_profile(cols, edges))
                fit = analysis.fit_power_law(profile)
                passed = abs(fit.exponent - 0.5) <= max(3.0 * fit.stderr, 0.05)
                emit(
                    name,
                    passed,
                    f"drift rate ~ {fit.amplitude:.4g} * d_r^{fit.exponent:.4f} "
                    f"(stderr {fit.stderr:.2g})",
                    {
                        "check": name,
                        "passed": passed,
                        "exponent": fit.exponent,
                        "amplitude": fit.amplitude,
                        "stderr": fit.stderr,
                        "profile": profile.to_dict(),
                    },
                )
                _write_profile_csv(outdir, profile, fit)
            elif name == "growth":
                rates = [analysis.growth_rate(cols) for cols in col_list]
                beta = min(r.beta_hat for r in rates)
                alpha = max(r.alpha_hat for r in rates)
                align = analysis.alignment_median(col_list[0])
                passed = beta > 0.0
                emit(
                    name,
                    passed,
                    f"d_r/n envelope [{beta:.4g}, {alpha:.4g}], "
                    f"alignment median {align:.4g}",
                    {
                        "check": name,
                        "passed": passed,
                        "beta_hat": [r.beta_hat for r in rates],
                        "alpha_hat": [r.alpha_hat for r in rates],
                        "alignment_median": align,
                    },
                )
            elif name == "cramer":
                C, p = analysis.cramer_constants(config.lam, config.omega)
                mean = analysis.cramer_mean_Y(p, C, config.lam, config.omega)
                n_mc = 1_000_000
                draws = analysis.sample_cramer_Y(
                    derive_stream(config.seed, 2**32), p, C, config.lam, config.omega, n_mc
                )
                mc_mean = float(draws.mean())
                se = float(draws.std(ddof=1) / math.sqrt(n_mc))
                passed = abs(mc_mean - mean) <= 3.0 * se
                emit(
                    name,
                    passed,
                    f"closed-form mean {mean:.6g}, MC {mc_mean:.6g} +/- {se:.2g} (1 SE)",
                    {
                        "check": name,
                        "passed": passed,
                        "C": C,
                        "p": p,
                        "mean": mean,
                        "mc_mean": mc_mean,
                        "mc_se": se,
                        "mc_samples": n_mc,
                        "mgf_at_0": analysis.cramer_mgf_Y(
                            0.0, p, C, config.lam, config.omega
                        ),
                    },
                )
            elif name == "compare":
                comparison = compare_growth(col_list[0], samples)
                walk = comparison.collision
                sde = comparison.langevin
                passed = walk.winner == "polynomial" and sde.winner == "exponential"
                emit(
                    name,
                    passed,
                    f"collision walk: {walk.winner} "
                    f"(exponent {walk.polynomial_exponent:.3g}); "
                    f"langevin: {sde.winner} (rate {sde.exponential_rate:.3g})",
                    {"check": name, "passed": passed, **comparison.to_dict()},
                )
        except ValueError as exc:
            lines.append(f"ERROR {name}: {exc}")
            failed_runtime = True

    _write_trajectory_csv(outdir, col_list[0])
    if args.svg:
        _write_trajectory_svg(outdir, col_list[0])

    for line in lines:
        print(line)
    if failed_runtime or failed_deterministic:
        return EXIT_RUNTIME
    return EXIT_OK


def _write_trajectory_csv(outdir: Path, cols: analysis.TrajectoryColumns) -> None:
    n = len(cols)
    stride = max(1, -(-n // _MAX_CSV_ROWS))
    t = cols.t_after[::stride]
    x = cols.x[::stride]
    with open(outdir / "trajectory.csv", "w", encoding="utf-8") as fh:
        fh.write("t,x1,x2\n")
        for i in range(t.size):
            fh.write(f"{float(t[i])!r},{float(x[i, 0])!r},{float(x[i, 1])!r}\n")


def _write_profile_csv(
    outdir: Path, profile: analysis.RadialBinStats, fit: analysis.PowerLawFit
) -> None:
    centers = profile.centers
    mean = profile.mean_rate
    var = profile.var_rate
    tau = profile.mean_tau
    with open(outdir / "profile.csv", "w", encoding="utf-8") as fh:
        fh.write("edge_lo,edge_hi,center,count,mean_rate,var_rate,mean_tau\n")
        for i in range(centers.size):
            fh.write(
                f"{profile.edges[i]!r},{profile.edges[i + 1]!r},{float(centers[i])!r},"
                f"{int(profile.count[i])},{float(mean[i])!r},{float(var[i])!r},"
                f"{float(tau[i])!r}\n"
            )
    with open(outdir / "fit_lines.csv", "w", encoding="utf-8") as fh:
        fh.write("center,power_law\n")
        for i in range(centers.size):
            c = float(centers[i])
            fh.write(f"{c!r},{fit.amplitude * c ** fit.exponent!r}\n")


def _write_trajectory_svg(outdir: Path, cols: analysis.TrajectoryColumns) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    n = len(cols)
    stride = max(1, -(-n // _MAX_CSV_ROWS))
    x = cols.x[::stride]
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    ax.plot(x[:, 0], x[:, 1], lw=0.3)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_aspect("equal")
    ax.set_title("collision points, x1-x2 projection")
    fig.savefig(outdir / "trajectory.svg")
    plt.close(fig)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotwalk",
        description="Event-driven random walk in a rotating medium: "
        "simulation, analysis, and a Langevin comparator.",
    )
    parser.add_argument(
        "--version", action="version", version=f"rotwalk {__version__}"
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add_config_flags(sp) -> None:
        sp.add_argument("--config", metavar="PATH", help="JSON config file")
        sp.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config key (dotted path, JSON value)",
        )
        sp.add_argument(
            "--seed",
            type=_parse_seed,
            default=None,
            help="master seed (decimal or 0x hex), overrides the config",
        )
        sp.add_argument("--out", required=True, metavar="DIR", help="output directory")

    sp = sub.add_parser("simulate", help="run one trajectory, writing an event log")
    add_config_flags(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser(
        "ensemble", help="run many trajectories and write merged aggregates"
    )
    add_config_flags(sp)
    sp.add_argument(
        "--trajectories", type=int, required=True, metavar="N", help="ensemble size"
    )
    sp.add_argument(
        "--workers",
        type=int,
        default=None,
        metavar="N",
        help="process count (default: ROTWALK_WORKERS or 1); "
        "aggregates do not depend on it",
    )
    sp.add_argument(
        "--aggregate-only",
        action="store_true",
        help="skip per-trajectory event logs, write aggregate.json only",
    )
    sp.set_defaults(func=cmd_ensemble)

    sp = sub.add_parser("langevin", help="integrate the comparator SDE")
    add_config_flags(sp)
    sp.set_defaults(func=cmd_langevin)

    sp = sub.add_parser("analyze", help="audit event logs and fit growth laws")
    sp.add_argument("inputs", nargs="+", metavar="EVENTS", help="event log files")
    sp.add_argument(
        "--checks",
        default="lemma1",
        metavar="LIST",
        help="comma-separated subset of: " + ", ".join(_ALL_CHECKS),
    )
    sp.add_argument(
        "--langevin", metavar="CSV", help="samples.csv for the compare check"
    )
    sp.add_argument("--out", required=True, metavar="DIR", help="output directory")
    sp.add_argument(
        "--svg", action="store_true", help="also draw the x1-x2 projection (matplotlib)"
    )
    sp.set_defaults(func=cmd_analyze)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"rotwalk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
