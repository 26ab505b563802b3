"""Command-line front end.

Exit codes: 0 success, 1 input or validation error, 2 infeasible budget or
stop-criterion failure, 3 internal invariant breach.
"""
from __future__ import annotations

import argparse
import json
import math
import shutil
import sys
from importlib import resources
from pathlib import Path

from . import budget, serialize, strategy, testset
from .model import ValidationReport, validate_model
from .render import profile_csv, render_profile_svg
from .riskengine import PlanError, SimulationResult, simulate

OBJECTIVES = {"avg-risk": "average_risk", "max-risk": "max_risk", "duration": "duration"}
DATA_FILES = (
    "mds_model.json",
    "scheme1.json",
    "scheme2.json",
    "mds_pipeline.json",
    "tigersharc.json",
    "mds_registry.json",
)


class UsageError(Exception):
    pass


class InvariantError(RuntimeError):
    pass


def _fail_report(source: str, report: ValidationReport) -> None:
    first = report.errors[0]
    raise UsageError(f"{source}: {first.location}: {first.message}")


def _load_model(path: str):
    model = serialize.load_model(path)
    report = validate_model(model)
    if not report.ok:
        _fail_report(path, report)
    return model


def _check_invariants(result: SimulationResult) -> None:
    k = result.kpis
    values = result.profile.values
    if len(values) != k.phi or result.profile.ticks != list(range(1, k.phi + 1)):
        raise InvariantError("profile ticks are not consecutive from 1")
    if any(v < -1e-12 for v in values):
        raise InvariantError("negative risk in profile")
    if values and values[-1] != k.remaining_risk:
        raise InvariantError("remaining risk differs from the final sample")
    if not math.isclose(k.average_risk * k.phi, k.total_risk_area, rel_tol=1e-12, abs_tol=1e-12):
        raise InvariantError("average risk times duration differs from total risk")


def _distinct_outputs(args, names: list[str], inputs: list[str]) -> None:
    outs = [getattr(args, n) for n in names if getattr(args, n, None)]
    resolved = [Path(p).resolve() for p in outs]
    if len(set(resolved)) != len(resolved):
        raise UsageError("output paths must be distinct")
    ins = {Path(p).resolve() for p in inputs if p}
    clash = [str(p) for p in resolved if p in ins]
    if clash:
        raise UsageError(f"output path {clash[0]} would overwrite an input")


def _write_report(path: str, kind: str, doc: dict) -> None:
    """Emit a JSON report after checking it re-parses under its schema."""
    text = serialize.dumps(doc)
    try:
        serialize.check_schema(json.loads(text), serialize.REPORT_SCHEMAS[kind], path)
    except serialize.InputError as exc:
        raise InvariantError(f"emitted {kind} report does not match its schema: {exc}") from None
    serialize.write_atomic(path, text)


def _plans_from_args(args, model) -> list:
    plans = []
    for path in args.plan or []:
        plans.append(serialize.load_plan(path))
    for text in args.partition or []:
        blocks = strategy.parse_partition(text)
        name = "conventional" if len(blocks) == 1 else text
        plans.append(strategy.build_adaptive_plan(model, blocks, name=name))
    return plans


def _validated(model, plan, source: str) -> ValidationReport:
    report = strategy.validate_plan(model, plan)
    if not report.ok:
        _fail_report(source, report)
    return report


def _event_dicts(events) -> list[dict]:
    return [
        {"tick": e.tick, "kind": e.kind, "action": e.action, "opened": list(e.opened),
         "cleared": list(e.cleared), "note": e.note}
        for e in events
    ]


def cmd_simulate(args) -> int:
    _distinct_outputs(args, ["profile_csv", "svg", "report"], [args.model, *(args.plan or [])])
    model = _load_model(args.model)
    if args.plan and args.partition:
        raise UsageError("use either --plan or --partition, not both")
    plans = _plans_from_args(args, model) or [strategy.build_conventional_plan(model)]
    if len(plans) > 1:
        raise UsageError("simulate takes a single plan")
    plan = plans[0]
    report = _validated(model, plan, args.plan[0] if args.plan else "--partition")
    result = simulate(model, plan)
    _check_invariants(result)
    k = result.kpis
    if args.profile_csv:
        serialize.write_atomic(args.profile_csv, profile_csv(result.profile))
    if args.svg:
        serialize.write_atomic(args.svg, render_profile_svg([result.profile], [plan.name or "plan"]))
    if args.report:
        doc = {
            "plan": plan.name,
            "kpis": k.as_dict(),
            "profile": [[t, r] for t, r in result.profile.samples],
            "events": _event_dicts(result.events),
            "warnings": [str(w) for w in report.warnings],
        }
        _write_report(args.report, "simulate", doc)
    print(f"{plan.name or 'plan'}: phi={k.phi} cost={k.cost:g} max={k.max_risk:g} "
          f"R_R={k.remaining_risk:g} R_T={k.total_risk_area:g} R_AD={k.average_risk:.3f}")
    for w in report.warnings:
        print(w, file=sys.stderr)
    return 2 if any(w.code == "stop-criterion" for w in report.warnings) else 0


def cmd_compare(args) -> int:
    _distinct_outputs(args, ["report", "svg"], [args.model, *(args.plan or [])])
    model = _load_model(args.model)
    plans = _plans_from_args(args, model)
    if len(plans) < 2:
        raise UsageError("compare needs at least two plans (--plan / --partition)")
    for i, p in enumerate(plans):
        _validated(model, p, f"plan {i + 1}")
    objectives = [strategy.StrategyObjective(k) for k in strategy.OBJECTIVE_KINDS]
    comparison = strategy.compare(model, plans, objectives)
    if args.report:
        doc = comparison.as_dict()
        doc["objective"] = OBJECTIVES[args.objective]
        doc["winner"] = comparison.winners[OBJECTIVES[args.objective]]
        _write_report(args.report, "compare", doc)
    if args.svg:
        profiles = [simulate(model, e.plan).profile for e in comparison.entries]
        serialize.write_atomic(args.svg, render_profile_svg(profiles, [e.label for e in comparison.entries]))
    parts = [f"{e.label}: R_AD={e.kpis.average_risk:.3f} max={e.kpis.max_risk:g} phi={e.kpis.phi}"
             for e in comparison.entries]
    print("; ".join(parts) + f"; winner({args.objective})={comparison.winners[OBJECTIVES[args.objective]]}")
    return 0


def cmd_optimize(args) -> int:
    _distinct_outputs(args, ["report", "plan_out"], [args.model])
    model = _load_model(args.model)
    objective = strategy.StrategyObjective(OBJECTIVES[args.objective])
    try:
        result = strategy.optimize(model, objective, args.max_cycles, args.mode, keep=args.keep)
    except strategy.OptimizerError as exc:
        raise UsageError(str(exc)) from None
    if args.report:
        doc = result.report.as_dict()
        doc.update({
            "objective": objective.kind,
            "mode": args.mode,
            "max_cycles": args.max_cycles,
            "explored": result.explored,
            "best": result.best.name,
            "score": result.score,
            "best_plan": serialize.plan_to_dict(result.best),
        })
        _write_report(args.report, "optimize", doc)
    if args.plan_out:
        serialize.write_atomic(args.plan_out, serialize.dumps(serialize.plan_to_dict(result.best)))
    print(f"best {result.best.name}: {objective.kind}={result.score:.6g} ({result.explored} explored, {args.mode})")
    return 0


def cmd_budget(args) -> int:
    _distinct_outputs(args, ["report"], [args.pipeline, args.benchmark])
    stages, ctx = serialize.load_pipeline(args.pipeline)
    bench = serialize.load_benchmark(args.benchmark)
    try:
        report = budget.analyze_pipeline(stages, bench, ctx, args.processor_limit)
    except (budget.BudgetConfigError, ValueError, OverflowError) as exc:
        raise UsageError(f"{args.pipeline}: {exc}") from None
    if args.report:
        _write_report(args.report, "budget", report.as_dict())
    sys.stdout.write(budget.format_report(report))
    return 0 if report.feasible else 2


def _registry(path: str):
    reg = serialize.load_registry(path)
    report = testset.validate_registry(reg)
    if not report.ok:
        _fail_report(path, report)
    return reg


def cmd_testset(args) -> int:
    _distinct_outputs(args, ["report"], [args.registry])
    reg = _registry(args.registry)
    try:
        if args.action == "reuse":
            delta = testset.reuse_delta(reg, args.from_version, args.to_version)
            doc = {"from": args.from_version, "to": args.to_version,
                   "reusable": sorted(delta.reusable), "uncovered_tags": sorted(delta.uncovered_tags)}
            summary = (f"{len(delta.reusable)} reusable, {len(delta.uncovered_tags)} uncovered "
                       f"tag(s): {', '.join(sorted(delta.uncovered_tags)) or '-'}")
        else:
            cover = testset.minimal_cover(reg, args.version)
            overlaps = testset.cover_overlaps(reg, cover)
            doc = {"version": args.version, "cover": cover,
                   "overlaps": [{"cases": list(pair), "tags": sorted(tags)} for pair, tags in overlaps.items()]}
            summary = f"cover of {len(cover)}: {', '.join(cover)}"
    except testset.CoverageGapError as exc:
        raise UsageError(f"{args.registry}: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"{args.registry}: {exc}") from None
    if args.report:
        _write_report(args.report, args.action, doc)
    print(summary)
    return 0


def cmd_validate(args) -> int:
    model = serialize.load_model(args.model)
    reports = [(args.model, validate_model(model))]
    if args.plan and reports[0][1].ok:
        reports.append((args.plan, strategy.validate_plan(model, serialize.load_plan(args.plan))))
    status = 0
    for source, report in reports:
        for issue in report:
            print(f"{source}: {issue}")
        if not report.ok:
            status = 1
        elif any(w.code == "stop-criterion" for w in report.warnings):
            status = max(status, 2)
    if status == 0:
        print("ok")
    return status


def cmd_export_data(args) -> int:
    out = Path(args.directory)
    out.mkdir(parents=True, exist_ok=True)
    pkg = resources.files("itrisk") / "data"
    for name in DATA_FILES:
        with resources.as_file(pkg / name) as src:
            shutil.copyfile(src, out / name)
    print(f"wrote {len(DATA_FILES)} files to {out}")
    return 0


class _Parser(argparse.ArgumentParser):
    # usage errors are parse errors (exit 1); 2 means infeasible or unsafe
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="itrisk", description="Integration-and-test risk planning toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="replay one plan and report its risk profile")
    p.add_argument("--model", required=True)
    p.add_argument("--plan", action="append", help="plan JSON file")
    p.add_argument("--partition", action="append", help='inline cycles, e.g. "DSP2,DAQ2,FFT/DSP4,CFAR2,PDP2"')
    p.add_argument("--profile-csv")
    p.add_argument("--svg")
    p.add_argument("--report", help="JSON report path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="compare the KPIs of two or more plans")
    p.add_argument("--model", required=True)
    p.add_argument("--plan", action="append")
    p.add_argument("--partition", action="append")
    p.add_argument("--objective", choices=sorted(OBJECTIVES), default="avg-risk")
    p.add_argument("--report")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("optimize", help="search for the best integration plan")
    p.add_argument("--model", required=True)
    p.add_argument("--objective", choices=sorted(OBJECTIVES), default="avg-risk")
    p.add_argument("--max-cycles", type=int, default=2)
    p.add_argument("--mode", choices=["exhaustive", "greedy"], default="exhaustive")
    p.add_argument("--keep", type=int, default=10, help="ranked plans kept in the report")
    p.add_argument("--report")
    p.add_argument("--plan-out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("budget", help="processor and memory budget for a pipeline")
    p.add_argument("--pipeline", required=True)
    p.add_argument("--benchmark", required=True)
    p.add_argument("--processor-limit", type=int)
    p.add_argument("--report")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("testset", help="test-set reuse and minimal cover")
    tsub = p.add_subparsers(dest="action", required=True)
    r = tsub.add_parser("reuse", help="cases reusable from one version to a later one")
    r.add_argument("--registry", required=True)
    r.add_argument("--from", dest="from_version", required=True)
    r.add_argument("--to", dest="to_version", required=True)
    r.add_argument("--report")
    r.set_defaults(func=cmd_testset)
    c = tsub.add_parser("cover", help="minimal set of cases covering a version")
    c.add_argument("--registry", required=True)
    c.add_argument("--version", required=True)
    c.add_argument("--report")
    c.set_defaults(func=cmd_testset)

    p = sub.add_parser("validate", help="check a model and optionally a plan")
    p.add_argument("--model", required=True)
    p.add_argument("--plan")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("export-data", help="copy the bundled MDS example files")
    p.add_argument("directory")
    p.set_defaults(func=cmd_export_data)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, serialize.InputError, PlanError, strategy.BuildError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvariantError as exc:
        print(f"internal invariant breached: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
