"""Carry the k1 test cases forward to k2 and pick a small regression set."""
from __future__ import annotations

from itrisk import bundled, minimal_cover, reuse_delta
from itrisk.serialize import load_registry
from itrisk.testset import cover_overlaps, greedy_cover


def main() -> None:
    reg = load_registry(bundled("mds_registry.json"))
    delta = reuse_delta(reg, "k1", "k2")
    print("reusable from k1:", ", ".join(sorted(delta.reusable)))
    print("k2 tags with no k1 case:", ", ".join(sorted(delta.uncovered_tags)))

    cover = minimal_cover(reg, "k2")
    print(f"\nminimal k2 cover ({len(cover)} cases):", ", ".join(cover))
    print("greedy pick:", ", ".join(greedy_cover(reg, "k2")))
    for (a, b), shared in sorted(cover_overlaps(reg, cover).items()):
        print(f"  {a} and {b} both exercise {', '.join(sorted(shared))}")


if __name__ == "__main__":
    main()
