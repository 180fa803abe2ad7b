"""Command-line interface.

Commands: ``eval``, ``simulate``, ``select``, ``data-score``. Exit codes are
0 on success, 1 on I/O errors and 2 on validation errors. Every option can
also be set through an environment variable ``CPS_RELIAB_<OPTION>`` (for
example ``CPS_RELIAB_SEED``); an explicit flag wins.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from typing import Callable, Sequence

from .catalog import RedundancyPlan, assemble_architecture, load_catalog
from .composition import LiteralSum, NormalizedMean, Product, cps_breakdown
from .data_quality import QualitySchema, SchemaError, data_reliability, load_records, score_batch
from .documents import (
    architecture_to_dict,
    breakdown_to_dict,
    dump_json,
    fmt,
    load_architecture,
    render_breakdown,
)
from .models import DomainError
from .montecarlo import SimulationConfig, simulate

ENV_PREFIX = "CPS_RELIAB_"
EXIT_OK, EXIT_IO, EXIT_INVALID = 0, 1, 2


class UsageError(DomainError):
    pass


def _env(name: str, default=None, convert: Callable = str):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return default
    try:
        return convert(raw)
    except ValueError:
        raise UsageError(f"environment variable {ENV_PREFIX}{name.upper()} has an invalid value {raw!r}") from None


def _env_flag(name: str) -> bool:
    return _env(name, False, lambda s: s.strip().lower() in ("1", "true", "yes", "on"))


def _float(text: str) -> float:
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default=_env("format", "text"))

    parser = argparse.ArgumentParser(prog="cps-reliab", description="Reliability of cyber-physical systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate an architecture document")
    p.add_argument("model_path")
    p.add_argument("--mission", type=_float, default=_env("mission", None, float))
    p.add_argument("--curve", default=_env("curve"), metavar="T0:T1:STEPS")
    p.add_argument("--allow-literal-sum", action="store_true", default=_env_flag("allow_literal_sum"))

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo check of an architecture document")
    p.add_argument("model_path")
    p.add_argument("--samples", type=int, default=_env("samples", 100_000, int))
    p.add_argument("--seed", type=int, default=_env("seed", 0, int))
    p.add_argument("--mission", type=_float, default=_env("mission", None, float))
    p.add_argument("--workers", type=int, default=_env("workers", None, int))

    p = sub.add_parser("select", parents=[common], help="pick the most reliable catalog components")
    p.add_argument("catalog_path")
    p.add_argument("--mission", type=_float, default=_env("mission", None, float))
    p.add_argument("--redundancy", default=_env("redundancy", ""), metavar="MODULE=COPIES,...")
    p.add_argument("--positions", default=_env("positions", ""), metavar="MODULE=COUNT,...")
    p.add_argument("--emit-model", default=_env("emit_model"), metavar="OUT.json")

    p = sub.add_parser("data-score", parents=[common], help="score a record batch against a schema")
    p.add_argument("schema_path")
    p.add_argument("records_path")
    p.add_argument(
        "--combine",
        choices=("normalized_mean", "literal_sum", "product"),
        default=_env("combine", "normalized_mean"),
    )
    p.add_argument("--weights", default=_env("weights"), metavar="WC,WA,WI,WT")
    return parser


def _parse_curve(spec: str) -> list[float]:
    try:
        t0, t1, steps = spec.split(":")
        t0, t1, n = float(t0), float(t1), int(steps)
    except ValueError:
        raise UsageError(f"--curve expects T0:T1:STEPS, got {spec!r}") from None
    if n < 1 or t0 < 0 or t1 < t0:
        raise UsageError(f"--curve needs 0 <= T0 <= T1 and STEPS >= 1, got {spec!r}")
    return [t0 + (t1 - t0) * i / n for i in range(n)] + [t1]


def cmd_eval(args, out) -> int:
    arch = load_architecture(args.model_path)
    if args.mission is not None:
        arch = dataclasses.replace(arch, mission=args.mission)
    bd = cps_breakdown(arch, allow_literal_sum=args.allow_literal_sum)
    report = breakdown_to_dict(bd, arch.mission)
    curve = None
    if args.curve:
        curve = []
        for t in _parse_curve(args.curve):
            point = cps_breakdown(dataclasses.replace(arch, mission=t), allow_literal_sum=args.allow_literal_sum)
            curve.append((t, point.without_data, point.with_data))
    if args.format == "json":
        if curve is not None:
            report["curve"] = [{"t": t, "r_cps": r, "r_cps_with_data": rd} for t, r, rd in curve]
        out.write(dump_json(report))
        return EXIT_OK
    out.write(render_breakdown(report))
    if curve is not None:
        with_data = arch.data_reliability is not None
        out.write("\nt,r_cps" + (",r_cps_with_data" if with_data else "") + "\n")
        for t, r, rd in curve:
            out.write(f"{fmt(t)},{fmt(r)}" + (f",{fmt(rd)}" if with_data else "") + "\n")
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    arch = load_architecture(args.model_path)
    if args.mission is not None:
        arch = dataclasses.replace(arch, mission=args.mission)
    config = SimulationConfig(samples=args.samples, seed=args.seed)
    analytic = cps_breakdown(arch).value
    est = simulate(arch, config, workers=args.workers)
    report = {
        "mission_hours": arch.mission,
        "analytical": analytic,
        "p_hat": est.p_hat,
        "std_error": est.std_error,
        "ci95": list(est.ci95),
        "sigma_distance": est.sigma_distance(analytic),
        "samples": est.samples,
        "seed": est.seed,
        "degenerate": est.degenerate,
    }
    if args.format == "json":
        out.write(dump_json(report))
        return EXIT_OK
    lines = [
        f"mission_hours  {fmt(arch.mission)}",
        f"analytical  {fmt(analytic)}",
        f"p_hat  {fmt(est.p_hat)}",
        f"std_error  {fmt(est.std_error)}",
        f"ci95  {fmt(est.ci95[0])} {fmt(est.ci95[1])}",
        f"sigma_distance  {fmt(report['sigma_distance'])}",
        f"samples  {est.samples}",
        f"seed  {est.seed}",
    ]
    if est.degenerate:
        lines.append("flags  degenerate_ci")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_select(args, out) -> int:
    if args.mission is None:
        raise UsageError("select needs --mission (selection depends on the mission length)")
    plan = RedundancyPlan(
        copies=RedundancyPlan.parse_counts(args.redundancy),
        positions=RedundancyPlan.parse_counts(args.positions),
    )
    catalog = load_catalog(args.catalog_path)
    report = assemble_architecture(catalog, args.mission, plan)
    arch_doc = architecture_to_dict(report.architecture)
    if args.emit_model:
        with open(args.emit_model, "w", encoding="utf-8") as fh:
            fh.write(dump_json(arch_doc))
    modules = []
    for kind, sel in report.selections.items():
        modules.append(
            {
                "kind": kind.value,
                "chosen": sel.chosen.component_id,
                "tie": sel.tie,
                "candidates": [
                    {"component_id": c.entry.component_id, "reliability": c.reliability} for c in sel.ranked
                ],
            }
        )
    if args.format == "json":
        doc = {
            "mission_hours": report.mission,
            "selections": modules,
            "modules": report.modules,
            "r_cps": report.r_cps,
            "architecture": arch_doc,
        }
        out.write(dump_json(doc))
        return EXIT_OK
    lines = [f"mission_hours  {fmt(report.mission)}"]
    for m in modules:
        lines.append("")
        lines.append(f"[{m['kind']}]")
        for rank, cand in enumerate(m["candidates"], start=1):
            mark = "*" if rank == 1 else " "
            lines.append(f"{mark} {rank:>3}  {cand['component_id']}  {fmt(cand['reliability'])}")
        if m["tie"]:
            lines.append(f"  tie: {m['chosen']} chosen by smallest id")
    lines.append("")
    for name, value in report.modules.items():
        lines.append(f"R[{name}]  {fmt(value)}")
    lines.append(f"R_CPS  {fmt(report.r_cps)}")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_data_score(args, out) -> int:
    with open(args.schema_path, encoding="utf-8") as fh:
        try:
            schema_doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{args.schema_path}: not valid JSON: {exc}") from exc
    schema = QualitySchema.from_dict(schema_doc)
    batch = load_records(args.records_path, schema)
    if args.combine == "normalized_mean":
        weights = None
        if args.weights:
            try:
                weights = tuple(float(w) for w in args.weights.split(","))
            except ValueError:
                raise UsageError(f"--weights expects four numbers, got {args.weights!r}") from None
        mode = NormalizedMean(weights)
    elif args.combine == "literal_sum":
        mode = LiteralSum()
    else:
        mode = Product()
    scores = score_batch(batch, schema)
    combined = data_reliability(scores, mode)
    report = {
        "completeness": scores.completeness,
        "accuracy": scores.accuracy,
        "consistency": scores.consistency,
        "timeliness": scores.timeliness,
        "violations": scores.violations,
        "checked": scores.checked,
        "combine": args.combine,
        "r_data": combined.value,
        "flags": {"literal_sum": combined.literal, "exceeds_unity": combined.exceeds_unity},
        "warnings": list(scores.warnings),
    }
    if args.format == "json":
        out.write(dump_json(report))
        return EXIT_OK
    lines = []
    for factor in ("completeness", "accuracy", "consistency", "timeliness"):
        lines.append(
            f"{factor}  {fmt(report[factor])}  ({scores.violations[factor]}/{scores.checked[factor]} violations)"
        )
    lines.append(f"R_Data[{args.combine}]  {fmt(combined.value)}")
    flags = [k for k, v in report["flags"].items() if v]
    if flags:
        lines.append("flags  " + ",".join(flags))
    for warning in scores.warnings:
        lines.append(f"warning  {warning}")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "simulate": cmd_simulate,
    "select": cmd_select,
    "data-score": cmd_data_score,
}


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        parser = build_parser()
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return COMMANDS[args.command](args, out)
    except FileNotFoundError as exc:
        err.write(f"error: cannot read {exc.filename}: {exc.strerror}\n")
        return EXIT_IO
    except OSError as exc:
        err.write(f"error: I/O failure on {exc.filename}: {exc.strerror}\n")
        return EXIT_IO
    except (DomainError, ValueError, KeyError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
