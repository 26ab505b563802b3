"""Replay the bundled conventional and adaptive MDS plans side by side.

Prints both risk profiles tick by tick, their KPIs, and writes an SVG with
the two step curves to the path given on the command line (optional).
"""
from __future__ import annotations

import argparse
from pathlib import Path

from itrisk import bundled, simulate
from itrisk.render import render_profile_svg
from itrisk.serialize import load_model, load_plan


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--svg", type=Path, help="write the step plot here")
    args = ap.parse_args()

    model = load_model(bundled("mds_model.json"))
    runs = {}
    for name in ("scheme1", "scheme2"):
        runs[name] = simulate(model, load_plan(bundled(f"{name}.json")))

    width = max(len(r.profile) for r in runs.values())
    print("tick  " + "  ".join(f"{n:>8}" for n in runs))
    for t in range(1, width + 1):
        cells = []
        for r in runs.values():
            v = r.profile.values
            cells.append(f"{v[t - 1]:8g}" if t <= len(v) else " " * 8)
        print(f"{t:>4}  " + "  ".join(cells))

    print()
    for name, r in runs.items():
        k = r.kpis
        print(f"{name}: duration {k.phi}, peak {k.max_risk:g}, area {k.total_risk_area:g}, "
              f"average {k.average_risk:.3f}, left open {k.remaining_risk:g}")

    # which tests brought the risk down in the adaptive plan
    print()
    for e in runs["scheme2"].events:
        if e.kind == "test":
            print(f"t={e.tick:>2} {e.action} clears {', '.join(e.cleared)}")

    if args.svg:
        svg = render_profile_svg([r.profile for r in runs.values()], list(runs), "MDS risk profiles")
        args.svg.write_text(svg)
        print(f"\nwrote {args.svg}")


if __name__ == "__main__":
    main()
