"""Size the bundled sonar pipeline on the bundled DSP benchmark.

With ``--limit`` the stages are also checked against a per-stage processor
cap, which shows which stage would need a faster part.
"""
from __future__ import annotations

import argparse

from itrisk import analyze_pipeline, bundled
from itrisk.budget import BudgetConfigError, format_report
from itrisk.serialize import load_benchmark, load_pipeline


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--limit", type=int, help="processors available per stage")
    args = ap.parse_args()

    stages, ctx = load_pipeline(bundled("mds_pipeline.json"))
    bench = load_benchmark(bundled("tigersharc.json"))
    try:
        report = analyze_pipeline(stages, bench, ctx, args.limit)
    except BudgetConfigError as exc:
        raise SystemExit(f"budget: {exc}")
    print(format_report(report), end="")


if __name__ == "__main__":
    main()
