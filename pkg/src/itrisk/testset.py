"""Versioned registry of tagged test cases: reuse across upgrades and minimal covers."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .model import ValidationReport

# exact minimum-cardinality search is attempted up to this many candidate cases
EXACT_COVER_LIMIT = 20


class CoverageGapError(ValueError):
    def __init__(self, version: str, missing: Iterable[str]):
        self.version = version
        self.missing = frozenset(missing)
        super().__init__(f"version {version!r}: no test case covers {sorted(self.missing)}")


@dataclass(frozen=True)
class TestCase:
    __test__ = False

    id: str
    tags: frozenset[str]
    introduced_in: str

    def __post_init__(self):
        object.__setattr__(self, "tags", frozenset(self.tags))


@dataclass
class TestSetRegistry:
    __test__ = False

    versions: list[str] = field(default_factory=list)
    cases: list[TestCase] = field(default_factory=list)
    requirements: dict[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        self.versions = list(self.versions)
        self.cases = list(self.cases)
        self.requirements = {k: frozenset(v) for k, v in self.requirements.items()}

    def add_version(self, label: str, requirements: Iterable[str]) -> None:
        if label in self.versions:
            raise ValueError(f"version {label!r} already registered")
        self.versions.append(label)
        self.requirements[label] = frozenset(requirements)

    def add_case(self, case: TestCase) -> None:
        if any(c.id == case.id for c in self.cases):
            raise ValueError(f"test case {case.id!r} already registered")
        if case.introduced_in not in self.versions:
            raise ValueError(f"unknown version {case.introduced_in!r}")
        self.cases.append(case)

    def index(self, version: str) -> int:
        try:
            return self.versions.index(version)
        except ValueError:
            raise ValueError(f"unknown version {version!r}") from None

    def cases_up_to(self, version: str) -> list[TestCase]:
        limit = self.index(version)
        return [c for c in self.cases if self.index(c.introduced_in) <= limit]

    def required(self, version: str) -> frozenset[str]:
        self.index(version)
        return self.requirements.get(version, frozenset())


def validate_registry(reg: TestSetRegistry) -> ValidationReport:
    report = ValidationReport()
    if len(set(reg.versions)) != len(reg.versions):
        report.add("duplicate-version", "versions", "a version label is listed twice")
    for v in reg.requirements:
        if v not in reg.versions:
            report.add("unknown-version", f"requirements.{v}", f"requirements for undeclared version {v!r}")
    all_tags = set().union(*reg.requirements.values()) if reg.requirements else set()
    seen = set()
    for i, c in enumerate(reg.cases):
        where = f"cases[{i}]"
        if c.id in seen:
            report.add("duplicate-case", where, f"test case id {c.id!r} used twice")
        seen.add(c.id)
        if not c.tags:
            report.add("empty-tags", where, f"test case {c.id!r} has no tags")
        if c.introduced_in not in reg.versions:
            report.add("unknown-version", where, f"test case {c.id!r} introduced in undeclared version {c.introduced_in!r}")
        stray = sorted(c.tags - all_tags)
        if stray:
            report.add("unknown-tag", where, f"tags {stray} appear in no version's requirements")
    return report


class ReuseDelta(NamedTuple):
    reusable: frozenset[str]
    uncovered_tags: frozenset[str]


def reuse_delta(reg: TestSetRegistry, from_version: str, to_version: str) -> ReuseDelta:
    """Cases from ``from_version`` that still apply at ``to_version``, and the
    requirement tags no existing case exercises (new cases are needed there)."""
    k, m = reg.index(from_version), reg.index(to_version)
    if k > m:
        raise ValueError(f"version {from_version!r} does not precede {to_version!r}")
    existing = reg.cases_up_to(from_version)
    target = reg.required(to_version)
    reusable = frozenset(c.id for c in existing if c.tags <= target)
    covered = set().union(*(c.tags for c in existing)) if existing else set()
    return ReuseDelta(reusable, frozenset(target - covered))


def _candidates(reg: TestSetRegistry, version: str) -> tuple[frozenset[str], list[TestCase]]:
    need = reg.required(version)
    cases = sorted((c for c in reg.cases_up_to(version) if c.tags & need), key=lambda c: c.id)
    have = set().union(*(c.tags for c in cases)) if cases else set()
    if not need <= have:
        raise CoverageGapError(version, need - have)
    return need, cases


def greedy_cover(reg: TestSetRegistry, version: str) -> list[str]:
    """Classic greedy set cover: largest uncovered gain first, ties by case id."""
    need, cases = _candidates(reg, version)
    left = set(need)
    chosen: list[str] = []
    while left:
        best = min(cases, key=lambda c: (-len(c.tags & left), c.id))
        chosen.append(best.id)
        left -= best.tags
    return chosen


def minimal_cover(reg: TestSetRegistry, version: str) -> list[str]:
    """Smallest set of cases covering every requirement tag of ``version``.

    Starts from the greedy cover; for registries of up to
    ``EXACT_COVER_LIMIT`` candidates it then searches for a strictly smaller
    cover and, if one exists, returns it ordered by greedy gain.
    """
    need, cases = _candidates(reg, version)
    chosen = greedy_cover(reg, version)
    if len(cases) > EXACT_COVER_LIMIT or len(chosen) <= 1:
        return chosen
    for size in range(1, len(chosen)):
        for combo in itertools.combinations(cases, size):
            if need <= frozenset().union(*(c.tags for c in combo)):
                return _greedy_order(list(combo), need)
    return chosen


def _greedy_order(subset: list[TestCase], need: frozenset[str]) -> list[str]:
    left, out, pool = set(need), [], list(subset)
    while pool:
        best = min(pool, key=lambda c: (-len(c.tags & left), c.id))
        out.append(best.id)
        left -= best.tags
        pool.remove(best)
    return out


def cover_overlaps(reg: TestSetRegistry, case_ids: Iterable[str]) -> dict[tuple[str, str], frozenset[str]]:
    """Tags shared by each pair of the given cases (empty pairs omitted)."""
    by_id = {c.id: c for c in reg.cases}
    ids = list(case_ids)
    out = {}
    for a, b in itertools.combinations(ids, 2):
        shared = by_id[a].tags & by_id[b].tags
        if shared:
            out[(a, b)] = shared
    return out


def greedy_bound(optimum: int, n_tags: int) -> float:
    """Worst-case greedy cover size for a given optimum: opt * (1 + ln n)."""
    return optimum * (1 + math.log(max(n_tags, 1)))
