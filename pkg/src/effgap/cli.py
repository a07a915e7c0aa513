"""Command-line surface: statistics, local search, grid solvers, generators.

Every invocation emits one run manifest (JSON) describing the command,
input digests, configuration, tool version and result summary; a
manifest plus the inputs reproduces the run.  Manifests go to stderr by
default so stdout stays byte-stable for diffing; ``--manifest`` redirects
them to a file.  Percentages print with two decimals; ``--exact`` adds
the underlying rationals.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .core import PARTY_A, wasted_votes
from .county import ingest, plan_stats, read_plan_csv, write_plan_csv
from .grid import (
    OracleLimitError,
    brute_force_opt,
    gen_hardness_instance,
    read_instance,
    subset_sum_oracle,
    write_instance,
    write_partition,
)
from .canonical import solve_two_near_stable
from .localsearch import RNG_ALGORITHM, SearchConfig, run
from .synthdata import STATE_PROFILES, synth_state_csv
from .yconvex import solve_yconvex

DATA_DIR_ENV = "EFFGAP_DATA_DIR"


def format_percent(x: Fraction) -> str:
    bp = round(x * 10000)
    sign = "-" if bp < 0 else ""
    bp = abs(bp)
    return f"{sign}{bp // 100}.{bp % 100:02d} %"


def format_half(scaled: int) -> str:
    """A value stored as twice its magnitude, printed exactly."""
    sign = "-" if scaled < 0 else ""
    q, r = divmod(abs(scaled), 2)
    return f"{sign}{q}.5" if r else f"{sign}{q}"


def _resolve(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        base = os.environ.get(DATA_DIR_ENV)
        if base and not p.is_absolute():
            candidate = Path(base) / p
            if candidate.exists():
                return candidate
    return p


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _emit_manifest(args: argparse.Namespace, manifest: dict) -> None:
    text = json.dumps(manifest, sort_keys=True)
    if getattr(args, "manifest", None):
        Path(args.manifest).write_text(text + "\n")
    else:
        print(text, file=sys.stderr)


def _ingest_path(path: Path):
    result = ingest(path.read_text())
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return result


def cmd_stats(args: argparse.Namespace) -> tuple[int, dict, list[Path]]:
    data_path = _resolve(args.data)
    result = _ingest_path(data_path)
    graph, plan = result.graph, result.plan
    inputs = [data_path]
    if args.plan:
        plan_path = _resolve(args.plan)
        plan = read_plan_csv(graph, plan_path.read_text())
        inputs.append(plan_path)
    stats = plan_stats(graph, plan)
    out = []
    if args.json:
        for d, stat in zip(plan.district_ids, stats.per_district):
            wa, wb = wasted_votes(stat.votes)
            out.append(json.dumps({
                "district": d,
                "democrats": stat.votes.party_a,
                "gop": stat.votes.party_b,
                "population": stat.votes.population(),
                "winner": "D" if stat.winner == PARTY_A else "R",
                "wasted_d": str(wa),
                "wasted_r": str(wb),
                "scaled_gap": stat.scaled_effgap,
            }, sort_keys=True))
    else:
        out.append(
            f"{'district':>8}  {'democrats':>10}  {'gop':>10}  {'population':>11}  "
            f"{'winner':>6}  {'wasted-d':>12}  {'wasted-r':>12}  {'gap':>12}"
        )
        for d, stat in zip(plan.district_ids, stats.per_district):
            wa, wb = wasted_votes(stat.votes)
            out.append(
                f"{d:>8}  {stat.votes.party_a:>10}  {stat.votes.party_b:>10}  "
                f"{stat.votes.population():>11}  {'D' if stat.winner == PARTY_A else 'R':>6}  "
                f"{format_half(int(2 * wa)):>12}  {format_half(int(2 * wb)):>12}  "
                f"{format_half(stat.scaled_effgap):>12}"
            )
    total = graph.total_votes()
    pop = total.population()
    share_d = Fraction(total.party_a, pop)
    out.append(f"vote share: Democrats {format_percent(share_d)} / GOP {format_percent(1 - share_d)}")
    out.append(f"seats: Democrats {stats.seats_a} / GOP {stats.seats_b}")
    out.append(f"normalized efficiency gap: {format_percent(stats.normalized)}")
    if args.exact:
        out.append(f"exact normalized gap: {stats.normalized}")
        out.append(f"total gap (scaled by 2): {stats.total_scaled_abs}")
    print("\n".join(out))
    summary = {
        "normalized_bp": str(round(stats.normalized * 10000)),
        "seats_a": stats.seats_a,
        "seats_b": stats.seats_b,
        "total_scaled_abs": stats.total_scaled_abs,
    }
    return 0, summary, inputs


def cmd_localsearch(args: argparse.Namespace) -> tuple[int, dict, list[Path]]:
    data_path = _resolve(args.data)
    result = _ingest_path(data_path)
    graph, plan0 = result.graph, result.plan
    cfg = SearchConfig(
        mu=args.mu, k=args.k, seed=args.seed, replicas=args.replicas,
        best_improvement=args.best_improvement,
    )
    jobs = args.jobs if args.jobs > 0 else (os.cpu_count() or 1)
    run_result = run(graph, plan0, cfg, jobs=jobs)
    before = plan_stats(graph, plan0)
    after = plan_stats(graph, run_result.best_plan)
    out = [
        f"{'':10}  {'seats-D':>7}  {'seats-R':>7}  {'normalized gap':>15}",
        f"{'original':10}  {before.seats_a:>7}  {before.seats_b:>7}  {format_percent(before.normalized):>15}",
        f"{'new':10}  {after.seats_a:>7}  {after.seats_b:>7}  {format_percent(after.normalized):>15}",
    ]
    best_trace = run_result.traces[run_result.best_replica]
    out.append(
        f"best replica: {run_result.best_replica} of {cfg.replicas}; "
        f"accepted moves: {len(best_trace.moves)}"
    )
    if args.exact:
        out.append(f"exact normalized gap: original {before.normalized}, new {after.normalized}")
    print("\n".join(out))
    if args.plan_out:
        Path(args.plan_out).write_text(write_plan_csv(run_result.best_plan))
    if args.trace_out:
        Path(args.trace_out).write_text("".join(t.to_lines() for t in run_result.traces))
    summary = {
        "original_bp": str(round(before.normalized * 10000)),
        "new_bp": str(round(after.normalized * 10000)),
        "best_replica": run_result.best_replica,
        "rng": RNG_ALGORITHM,
    }
    return 0, summary, [data_path]


def cmd_solve(args: argparse.Namespace) -> tuple[int, dict, list[Path]]:
    grid_path = _resolve(args.grid)
    polygon, kappa = read_instance(grid_path.read_text())
    if args.kappa:
        kappa = args.kappa
    partition = None
    summary: dict = {"solver": args.solver, "kappa": kappa}
    if args.solver == "brute":
        mode = "near" if args.delta_near is not None else "exact"
        try:
            res = brute_force_opt(
                polygon, kappa, mode=mode, delta=args.delta_near, cell_limit=args.oracle_limit
            )
        except OracleLimitError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1, summary, [grid_path]
        if not res.feasible:
            print("status: infeasible")
            summary["status"] = "infeasible"
            return 2, summary, [grid_path]
        value = res.value
        partition = res.partitions[0]
        summary["optima"] = len(res.partitions)
    elif args.solver == "yconvex":
        res = solve_yconvex(polygon, kappa)
        if not res.feasible:
            print("status: infeasible")
            summary["status"] = "infeasible"
            return 2, summary, [grid_path]
        value = res.value
        partition = res.partition
    elif args.solver == "canonical":
        if kappa != 2:
            raise ValueError("canonical solver is defined for kappa = 2 only")
        epsilon = args.epsilon
        if epsilon is None and args.t:
            epsilon = Fraction(1, args.t)
        if epsilon is None:
            epsilon = Fraction(1, 3)
        res = solve_two_near_stable(polygon, epsilon)
        value = res.plan.value
        partition = res.plan.partition
        summary["delta_achieved"] = str(res.delta_achieved)
        summary["delta_bound"] = str(res.delta_bound)
        summary["source"] = res.plan.source
        print(f"nearness achieved: {res.delta_achieved} (bound {res.delta_bound})")
        if res.stability is not None:
            print(f"stability ratio: {res.stability}")
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown solver {args.solver}")
    print("status: optimal")
    print(f"value (scaled by 2): {value}")
    print(f"value: {format_half(value)}")
    if args.exact:
        print(f"exact value: {Fraction(value, 2)}")
    if args.plan_out and partition is not None:
        Path(args.plan_out).write_text(write_partition(partition))
    summary["status"] = "optimal"
    summary["value_scaled"] = value
    return 0, summary, [grid_path]


def cmd_gen_hardness(args: argparse.Namespace) -> tuple[int, dict, list[Path]]:
    values = [v * args.scale for v in args.values]
    try:
        instance = gen_hardness_instance(values, args.decoys, args.seed)
    except ValueError as exc:
        if "divisible by 4" in str(exc):
            raise ValueError(f"{exc} (hint: pass --scale 4)") from exc
        raise
    text = write_instance(instance.polygon, instance.kappa)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    summary = {
        "cells": instance.polygon.size,
        "kappa": instance.kappa,
        "values_total": instance.values_total,
        "has_equal_split": subset_sum_oracle(values),
    }
    return 0, summary, []


def cmd_synth_data(args: argparse.Namespace) -> tuple[int, dict, list[Path]]:
    text = synth_state_csv(args.state, args.seed)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0, {"state": args.state, "rows": text.count("\n") - 1}, []


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="effgap",
        description="Compute and minimize the efficiency-gap measure of district plans.",
    )
    parser.add_argument("--manifest", help="write the run manifest to a file instead of stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="efficiency-gap report for a county data file")
    p.add_argument("data", help="county CSV (resolved against $" + DATA_DIR_ENV + ")")
    p.add_argument("--plan", help="plan CSV overriding the data file's districts")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--json", action="store_true", help="line-delimited records instead of a table")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("localsearch", help="randomized improvement search on a county file")
    p.add_argument("data")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mu", type=int, default=100, help="outer iterations (default 100)")
    p.add_argument("--k", type=int, default=20, help="per-iteration node budget (default 20)")
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--jobs", type=int, default=0, help="replica parallelism; 0 = all cores")
    p.add_argument("--best-improvement", action="store_true")
    p.add_argument("--plan-out")
    p.add_argument("--trace-out")
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_localsearch)

    p = sub.add_parser("solve", help="solve a grid instance file")
    p.add_argument("grid")
    p.add_argument("--solver", choices=["brute", "yconvex", "canonical"], default="brute")
    p.add_argument("--kappa", type=int, help="override the file header's district count")
    p.add_argument("--delta-near", type=Fraction, help="population slack for near mode")
    p.add_argument("--t", type=int, help="canonical block side")
    p.add_argument("--epsilon", type=Fraction, help="canonical accuracy parameter")
    p.add_argument("--oracle-limit", type=int, default=14)
    p.add_argument("--plan-out")
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen-hardness", help="emit a reduction gadget as a grid file")
    p.add_argument("values", type=int, nargs="+")
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--decoys", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_hardness)

    p = sub.add_parser("synth-data", help="emit a synthetic state benchmark CSV")
    p.add_argument("state", choices=sorted(STATE_PROFILES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_synth_data)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        code, summary, inputs = args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    config = {
        k: (str(v) if isinstance(v, Fraction) else v)
        for k, v in vars(args).items()
        if k not in {"func", "manifest"} and not callable(v)
    }
    manifest = {
        "command": args.command,
        "config": config,
        "inputs": {str(p): _digest(p) for p in inputs},
        "result": summary,
        "rng": RNG_ALGORITHM,
        "version": __version__,
        "wall_time_s": round(time.perf_counter() - started, 6),
    }
    _emit_manifest(args, manifest)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
