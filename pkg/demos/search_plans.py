"""Compare the bundled plans, then let the optimizer look for better ones."""
from __future__ import annotations

import argparse

from itrisk import bundled, compare, optimize
from itrisk.serialize import load_model, load_plan


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cycles", type=int, default=2, help="max design cycles in the search")
    args = ap.parse_args()

    model = load_model(bundled("mds_model.json"))
    plans = [load_plan(bundled(f"{n}.json")) for n in ("scheme1", "scheme2")]
    report = compare(model, plans)
    print("winners:", ", ".join(f"{k} -> {v}" for k, v in sorted(report.winners.items())))
    for label, delta in report.deltas.items():
        print(f"{label} vs {report.baseline}:",
              ", ".join(f"{f} {d:+g}" for f, d in delta.items()))

    for objective in ("average_risk", "max_risk"):
        best = optimize(model, objective, max_cycles=args.cycles)
        print(f"\n{objective}: {best.explored} plans scored, best {best.score:.3f}")
        ranked = sorted(best.report.entries, key=lambda e: (getattr(e.kpis, objective), e.label))
        for entry in ranked[:3]:
            print(f"  {entry.label:<40} avg {entry.kpis.average_risk:.3f}  peak {entry.kpis.max_risk:g}")

    quick = optimize(model, "average_risk", max_cycles=args.cycles, mode="greedy")
    print(f"\ngreedy: {quick.best.name} scores {quick.score:.3f} after {quick.explored} evaluations")


if __name__ == "__main__":
    main()
