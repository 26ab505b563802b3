"""Build, validate, compare and optimize integration plans.

A plan is generated from *steps*: each step is a tuple of module ids that
join the running assembly in one integration action, followed by exactly
one test of that assembly. A conventional plan makes every module available
in a single cycle; an adaptive plan splits the modules into consecutive
design cycles, each inheriting the previous cycle's verified assembly.
"""
from __future__ import annotations

import functools
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .model import Pair, ProductModel, ValidationReport, iface_key
from .riskengine import (
    DesignCycle,
    IntegrationPlan,
    KpiReport,
    PlanAction,
    PlanError,
    PlanReferenceError,
    Replay,
    SimulationResult,
    simulate,
)
from .serialize import plan_identity

log = logging.getLogger(__name__)

Step = tuple[str, ...]

ASSEMBLY_ID = "A"
MAX_STEP_SIZE = 2
EXHAUSTIVE_LIMIT = 8
OBJECTIVE_KINDS = ("average_risk", "max_risk", "duration")


class BuildError(ValueError):
    pass


class PrecedenceError(BuildError):
    def __init__(self, before: str, after: str, message: str = ""):
        self.pair = (before, after)
        super().__init__(message or f"precedence {before}->{after} violated: {after} integrated before {before}")


class PartitionError(BuildError):
    pass


class OptimizerError(ValueError):
    pass


# -- plan construction -----------------------------------------------------

def step_interfaces(model: ProductModel, step: Step, members: Iterable[str], assembly: str = ASSEMBLY_ID) -> list[Pair]:
    """Interfaces opened when ``step`` joins an assembly holding ``members``.

    Catalog interfaces between the new modules and the (grown) assembly are
    used; if the catalog has none, one generic module-to-assembly interface
    stands in so every integration carries integration risk.
    """
    inside = set(members) | set(step)
    found = set()
    for mid in step:
        for other in model.neighbours(mid):
            if other in inside:
                found.add(iface_key(mid, other))
    if not found:
        found.add(iface_key(step[0], assembly))
    return sorted(found)


def _check_step_precedence(model: ProductModel, step: Step, placed: set[str]) -> None:
    reachable = placed | set(step)
    for mid in step:
        for pred in sorted(model.predecessors(mid)):
            if pred not in reachable:
                raise PrecedenceError(pred, mid)


@dataclass(frozen=True)
class _Built:
    """What plan construction carries from one cycle into the next."""
    members: frozenset[str] = frozenset()
    pending: tuple[str, ...] = ()
    n_int: int = 0
    n_test: int = 0


def _build_cycle(
    model: ProductModel,
    index: int,
    block: Sequence[str],
    steps: Sequence[Step],
    prev: _Built,
    label: str,
    assembly: str = ASSEMBLY_ID,
) -> tuple[DesignCycle, _Built]:
    pool = prev.pending + tuple(m for m in block if m not in prev.pending)
    placed_here = [m for s in steps for m in s]
    if len(set(placed_here)) != len(placed_here):
        raise BuildError(f"cycle {index + 1}: a module appears in more than one step")
    stray = set(placed_here) - set(pool)
    if stray:
        raise BuildError(f"cycle {index + 1}: steps name modules outside the cycle: {sorted(stray)}")
    members = set(prev.members)
    n_int, n_test = prev.n_int, prev.n_test
    carried = (assembly,) if members else ()
    actions: list[PlanAction] = []
    for step in steps:
        step = tuple(step)
        if not step:
            raise BuildError(f"cycle {index + 1}: empty integration step")
        if not members and len(step) < 2:
            raise BuildError(f"cycle {index + 1}: cannot start an assembly from the single module {step[0]!r}")
        _check_step_precedence(model, step, members)
        n_int += 1
        n_test += 1
        actions += _step_actions(model, step, members, n_int, n_test, assembly)
        members |= set(step)
    pending = tuple(m for m in pool if m not in placed_here)
    if pending and (members or len(pending) > 1):
        raise BuildError(f"cycle {index + 1}: modules left unintegrated: {list(pending)}")
    cycle = DesignCycle(label, tuple(block), carried, tuple(actions))
    return cycle, _Built(frozenset(members), pending, n_int, n_test)


def _step_actions(
    model: ProductModel, step: Step, members: Iterable[str], n_int: int, n_test: int, assembly: str = ASSEMBLY_ID,
) -> tuple[PlanAction, PlanAction]:
    """The integrate/test pair for one step joining an assembly of ``members``."""
    return (
        PlanAction("integrate", f"I{n_int}", assembly, step, tuple(step_interfaces(model, step, members, assembly))),
        PlanAction("test", f"T{n_test}", assembly),
    )


def _plan_from_steps(
    model: ProductModel,
    blocks: Sequence[Sequence[str]],
    orders: Sequence[Sequence[Step]],
    labels: Sequence[str] | None = None,
    name: str = "",
    assembly: str = ASSEMBLY_ID,
) -> IntegrationPlan:
    cycles = []
    built = _Built()
    for index, (block, steps) in enumerate(zip(blocks, orders)):
        label = labels[index] if labels else f"k{index + 1}"
        cycle, built = _build_cycle(model, index, block, steps, built, label, assembly)
        cycles.append(cycle)
    if built.pending:
        log.warning("nothing to integrate: module %s stays unintegrated", built.pending[0])
    return IntegrationPlan(tuple(cycles), name)


def default_order(
    model: ProductModel, pool: Sequence[str], integrated: Iterable[str] = (), fresh: bool | None = None
) -> list[Step]:
    """Deterministic precedence-respecting steps over ``pool``.

    Modules are taken in ``pool`` order as soon as their predecessors are
    placed; each one is paired with a ready catalog neighbour (a board and
    the module mounted on it are integrated together).
    """
    placed = set(integrated)
    if fresh is None:
        fresh = not placed
    remaining = list(pool)
    steps: list[Step] = []
    if fresh and len(remaining) == 1:
        return []
    while remaining:
        ready = [m for m in remaining if model.predecessors(m) <= placed]
        if not ready:
            blocked = remaining[0]
            missing = sorted(model.predecessors(blocked) - placed)
            raise PrecedenceError(missing[0], blocked)
        head = ready[0]
        step = [head]
        reach = placed | {head}
        partners = [n for n in remaining
                    if n != head and n in model.neighbours(head) and model.predecessors(n) <= reach]
        step += partners[: MAX_STEP_SIZE - 1]
        if fresh and not steps and len(step) < 2:
            others = [n for n in remaining if n != head and model.predecessors(n) <= reach]
            if not others:
                raise BuildError(f"no module can join {head!r} to start the assembly")
            step.append(others[0])
        steps.append(tuple(step))
        placed |= set(step)
        remaining = [m for m in remaining if m not in step]
    return steps


def build_conventional_plan(
    model: ProductModel, order: Sequence[Sequence[str]] | None = None, label: str = "k1", name: str = "conventional"
) -> IntegrationPlan:
    """Single-cycle plan: everything available at t=1, one test per integration."""
    ids = list(model.module_ids)
    if order is None:
        order = default_order(model, ids)
    order = [tuple(s) for s in order]
    flat = [m for s in order for m in s]
    unknown = sorted(set(flat) - set(ids))
    if unknown:
        raise BuildError(f"order names undeclared modules: {unknown}")
    if len(ids) > 1 and sorted(flat) != sorted(ids):
        raise BuildError("order must integrate every module exactly once")
    return _plan_from_steps(model, [ids], [order], [label], name)


def build_adaptive_plan(
    model: ProductModel,
    partition: Sequence[Iterable[str]],
    orders: Sequence[Sequence[Sequence[str]] | None] | None = None,
    labels: Sequence[str] | None = None,
    name: str = "adaptive",
) -> IntegrationPlan:
    """One design cycle per partition block, each carrying the prior assembly.

    ``orders`` optionally fixes the steps of each cycle; missing entries use
    :func:`default_order`. A lone module that cannot start an assembly stays
    pending and is integrated in the next cycle.
    """
    blocks = [list(b) for b in partition]
    seen: dict[str, int] = {}
    for i, block in enumerate(blocks):
        if not block:
            raise PartitionError(f"block {i + 1} is empty")
        for m in block:
            if m in seen:
                raise PartitionError(f"module {m!r} appears in blocks {seen[m] + 1} and {i + 1}")
            seen[m] = i
    unknown = sorted(set(seen) - set(model.module_ids))
    if unknown:
        raise PartitionError(f"partition names undeclared modules: {unknown}")
    missing = [m for m in model.module_ids if m not in seen]
    if missing:
        raise PartitionError(f"partition does not cover modules: {missing}")
    if labels is not None and len(labels) != len(blocks):
        raise PartitionError("one label per block is required")

    resolved: list[list[Step]] = []
    integrated: list[str] = []
    pending: list[str] = []
    for i, block in enumerate(blocks):
        given = orders[i] if orders is not None and i < len(orders) else None
        pool = pending + block
        steps = [tuple(s) for s in given] if given is not None else default_order(model, pool, integrated)
        resolved.append(steps)
        placed = [m for s in steps for m in s]
        integrated += placed
        pending = [m for m in pool if m not in placed]
    return _plan_from_steps(model, blocks, resolved, labels, name)


def parse_partition(text: str) -> list[list[str]]:
    """``"DSP2,DAQ2,FFT/DSP4,CFAR2,PDP2"`` -> ``[["DSP2","DAQ2","FFT"], [...]]``."""
    blocks = [[m.strip() for m in part.split(",") if m.strip()] for part in text.split("/")]
    if not blocks or any(not b for b in blocks):
        raise PartitionError(f"malformed partition {text!r}")
    return blocks


# -- validation ------------------------------------------------------------

def validate_plan(model: ProductModel, plan: IntegrationPlan) -> ValidationReport:
    """Coverage, precedence, reference integrity and the stop criterion."""
    return _checked(model, plan)[0]


def _checked(model: ProductModel, plan: IntegrationPlan) -> tuple[ValidationReport, SimulationResult | None]:
    """Validation report plus the simulation it ran (None when it stopped early)."""
    report = ValidationReport()
    if not plan.cycles:
        report.add("empty-plan", "cycles", "plan has no design cycles")
        return report, None

    known = set(model.module_ids)
    where_available: dict[str, str] = {}
    for ci, cycle in enumerate(plan.cycles):
        for mid in cycle.available_modules:
            loc = f"cycles[{ci}].available"
            if mid not in known:
                report.add("unresolved-module", loc, f"module {mid!r} is not declared in the model")
            elif mid in where_available:
                report.add("duplicate-availability", loc,
                           f"module {mid!r} already available in cycle {where_available[mid]!r}")
            else:
                where_available[mid] = cycle.label
    for mid in model.module_ids:
        if mid not in where_available:
            report.add("coverage", "cycles", f"module {mid!r} is never made available")

    for ci, cycle in enumerate(plan.cycles):
        for ai, a in enumerate(cycle.actions):
            loc = f"cycles[{ci}].actions[{ai}] ({a.id})"
            if a.kind not in ("integrate", "test"):
                report.add("action-kind", loc, f"unknown action kind {a.kind!r}")
                continue
            if not isinstance(a.duration, int) or a.duration < 1:
                report.add("duration", loc, f"duration must be a positive integer, got {a.duration!r}")
            if a.cost < 0:
                report.add("cost", loc, f"cost must be nonnegative, got {a.cost!r}")
            if a.kind == "test" and not 0.0 < a.effectiveness <= 1.0:
                report.add("effectiveness", loc, f"effectiveness {a.effectiveness!r} outside (0, 1]")
            if a.kind == "integrate":
                if not a.added_modules and len(a.merged_assemblies) < 1:
                    report.add("integrate-shape", loc, "integration adds no module and merges no assembly")
                if not a.introduced_interfaces:
                    report.add("integrate-shape", loc, "integration declares no interface")
                for mid in a.added_modules:
                    if mid not in known:
                        report.add("unresolved-module", loc, f"integrates undeclared module {mid!r}")

    # precedence, tracked on assembly membership
    members: dict[str, set[str]] = {}
    for ci, cycle in enumerate(plan.cycles):
        for ai, a in enumerate(cycle.actions):
            if a.kind != "integrate":
                continue
            grown = members.setdefault(a.target_assembly, set())
            for aid in a.merged_assemblies:
                grown |= members.pop(aid, set())
            grown |= set(a.added_modules)
            for mid in a.added_modules:
                for pred in sorted(model.predecessors(mid)):
                    if pred not in grown:
                        report.add("precedence", f"cycles[{ci}].actions[{ai}] ({a.id})",
                                   f"{mid!r} joins {a.target_assembly!r} before its predecessor {pred!r}")

    if not report.ok:
        return report, None
    try:
        result = simulate(model, plan)
    except PlanReferenceError as exc:
        report.add("reference", "plan", str(exc))
        return report, None
    except PlanError as exc:
        report.add("structure", "plan", str(exc))
        return report, None

    full_tests = all(a.effectiveness >= 1.0 for a in plan.actions if a.kind == "test")
    remaining = result.kpis.remaining_risk
    if full_tests and remaining > 0:
        report.add("stop-criterion", "plan",
                   f"final test leaves open risk {remaining:g}; the plan must test until no risk remains",
                   severity="warning")
    return report, result


# -- comparison ------------------------------------------------------------

@dataclass(frozen=True)
class StrategyObjective:
    kind: str = "average_risk"
    weights: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS + ("weighted",):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.kind == "weighted":
            bad = sorted(set(self.weights) - set(OBJECTIVE_KINDS))
            if bad:
                raise ValueError(f"weights name unknown objectives: {bad}")
            if any(w < 0 for w in self.weights.values()) or not any(w > 0 for w in self.weights.values()):
                raise ValueError("weights must be nonnegative with at least one positive")

    def value(self, k: KpiReport) -> float:
        if self.kind == "weighted":
            return math.fsum(w * _kpi_value(k, name) for name, w in sorted(self.weights.items()))
        return _kpi_value(k, self.kind)


def _kpi_value(k: KpiReport, kind: str) -> float:
    if kind == "average_risk":
        return k.average_risk
    if kind == "max_risk":
        return k.max_risk
    return float(k.phi)


def _same(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)


@dataclass(frozen=True)
class PlanScore:
    label: str
    plan: IntegrationPlan
    kpis: KpiReport


DELTA_FIELDS = ("phi", "cost", "total_risk_area", "average_risk", "max_risk")


@dataclass
class ComparisonReport:
    entries: list[PlanScore]
    baseline: str
    deltas: dict[str, dict[str, float]]
    winners: dict[str, str]

    def entry(self, label: str) -> PlanScore:
        return next(e for e in self.entries if e.label == label)

    def as_dict(self) -> dict:
        return {
            "plans": [{"label": e.label, "kpis": e.kpis.as_dict()} for e in self.entries],
            "baseline": self.baseline,
            "deltas": self.deltas,
            "winners": self.winners,
        }


def _pick(entries: Sequence[PlanScore], objective: StrategyObjective) -> PlanScore:
    values = [objective.value(e.kpis) for e in entries]
    best = min(values)
    tied = [e for e, v in zip(entries, values) if _same(v, best)]
    return min(tied, key=lambda e: e.label)


def _report(scored: list[PlanScore], objectives: Sequence[StrategyObjective]) -> ComparisonReport:
    scored = sorted(scored, key=lambda e: e.label)
    base = scored[0]
    deltas = {}
    for e in scored[1:]:
        a, b = base.kpis.as_dict(), e.kpis.as_dict()
        deltas[e.label] = {f: b[f] - a[f] for f in DELTA_FIELDS}
    winners = {}
    for obj in objectives:
        winners[obj.kind] = _pick(scored, obj).label
    return ComparisonReport(scored, base.label, deltas, winners)


def _labels(plans: Sequence[IntegrationPlan]) -> list[str]:
    out = []
    for i, p in enumerate(plans):
        label = p.name or f"plan{i + 1}"
        while label in out:
            label = f"{label}#{i + 1}"
        out.append(label)
    return out


def compare(
    model: ProductModel,
    plans: Sequence[IntegrationPlan],
    objectives: Sequence[StrategyObjective] | None = None,
) -> ComparisonReport:
    """KPI table, deltas against the first plan (by label) and winners.

    Deltas are ``plan - baseline`` field-wise; winners take the smallest
    objective value, ties going to the lexicographically first label.
    """
    if len(plans) < 2:
        raise ValueError("compare needs at least two plans")
    if objectives is None:
        objectives = [StrategyObjective(k) for k in OBJECTIVE_KINDS]
    scored = []
    for label, plan in zip(_labels(plans), plans):
        report, result = _checked(model, plan)
        if not report.ok:
            raise PlanError(f"plan {label!r} is invalid: {report.errors[0]}")
        scored.append(PlanScore(label, plan, result.kpis))
    return _report(scored, objectives)


# -- optimization ----------------------------------------------------------

@dataclass
class OptimizationResult:
    best: IntegrationPlan
    objective: StrategyObjective
    score: float
    explored: int
    report: ComparisonReport


def plan_signature(blocks: Sequence[Sequence[str]], orders: Sequence[Sequence[Step]]) -> str:
    """Readable plan name: cycles split by ``/``, steps by ``,``, modules by ``+``."""
    parts = []
    for block, steps in zip(blocks, orders):
        if steps:
            parts.append(",".join("+".join(s) for s in steps))
        else:
            parts.append("(" + ",".join(block) + ")")
    return "/".join(parts)


def ordered_partitions(items: Sequence[str], max_blocks: int) -> Iterator[list[list[str]]]:
    """Every ordered partition of ``items`` into 1..max_blocks nonempty blocks."""
    items = list(items)
    n = len(items)
    for k in range(1, min(max_blocks, n) + 1):
        for assignment in itertools.product(range(k), repeat=n):
            if len(set(assignment)) != k:
                continue
            blocks: list[list[str]] = [[] for _ in range(k)]
            for item, b in zip(items, assignment):
                blocks[b].append(item)
            yield blocks


def step_sequences(model: ProductModel, pool: Sequence[str], placed: frozenset[str], fresh: bool) -> Iterator[list[Step]]:
    """All precedence-respecting step sequences integrating ``pool``.

    Steps hold one or two modules; an assembly is started by a pair. A lone
    module with nothing to join yields the empty sequence (it stays pending).
    """
    pool = sorted(pool)
    if _sequence_done(pool, fresh):
        yield []
        return
    for step in _next_steps(model, pool, placed, fresh):
        rest = [m for m in pool if m not in step]
        for tail in step_sequences(model, rest, placed | set(step), False):
            yield [step] + tail


def _sequence_done(pool: Sequence[str], fresh: bool) -> bool:
    # nothing left, or a lone module with no assembly to join
    return not pool or (fresh and len(pool) == 1)


def _next_steps(model: ProductModel, pool: Sequence[str], placed: frozenset[str], fresh: bool) -> list[Step]:
    """Steps that may come next from the sorted ``pool``."""
    candidates: list[Step] = []
    if not fresh:
        candidates += [(m,) for m in pool if model.predecessors(m) <= placed]
    for a, b in itertools.combinations(pool, 2):
        if model.predecessors(a) <= placed | {b} and model.predecessors(b) <= placed | {a}:
            candidates.append((a, b))
    return candidates


@functools.lru_cache(maxsize=4096)
def _sequences(model: ProductModel, pool: tuple[str, ...], placed: frozenset[str], fresh: bool) -> tuple:
    return tuple(step_sequences(model, pool, placed, fresh))


def _enumerate_orders(model: ProductModel, blocks: list[list[str]]) -> Iterator[list[list[Step]]]:
    n_modules = len(model.modules)

    def rec(i, placed, pending, has_assembly, acc):
        if i == len(blocks):
            if not pending or n_modules == 1:
                yield acc
            return
        pool = pending + blocks[i]
        for seq in _sequences(model, tuple(sorted(pool)), placed, not has_assembly):
            used = {m for s in seq for m in s}
            left = [m for m in pool if m not in used]
            yield from rec(i + 1, placed | used, left, has_assembly or bool(seq), acc + [seq])

    yield from rec(0, frozenset(), [], False, [])


def enumerate_plans(model: ProductModel, max_cycles: int) -> Iterator[IntegrationPlan]:
    """The exhaustive search space: every partition and every step order."""
    for blocks in ordered_partitions(sorted(model.module_ids), max_cycles):
        for orders in _enumerate_orders(model, blocks):
            yield _plan_from_steps(model, blocks, orders, name=plan_signature(blocks, orders))


def _score(model: ProductModel, plan: IntegrationPlan, objective: StrategyObjective) -> tuple[float, KpiReport]:
    k = simulate(model, plan).kpis
    return objective.value(k), k


def _scored_space(model: ProductModel, objective: StrategyObjective, max_cycles: int):
    """``(value, kpis, blocks, orders)`` for every plan of the search space.

    Walks the same space as :func:`enumerate_plans`, but steps shared by
    several plans are replayed once: every branch continues from a copy of
    the replay state at the branch point.
    """
    n_modules = len(model.modules)
    for blocks in ordered_partitions(sorted(model.module_ids), max_cycles):

        def cycles_from(i, placed, pending, orders, cycles, state):
            if i == len(blocks):
                if not pending or n_modules == 1:
                    k = state.result(IntegrationPlan(tuple(cycles))).kpis
                    yield objective.value(k), k, blocks, orders
                return
            head = DesignCycle(f"k{i + 1}", tuple(blocks[i]), (ASSEMBLY_ID,) if placed else ())
            state = state.copy()
            state.open_cycle(head)
            pool = sorted(pending + blocks[i])
            yield from steps_from(i, pool, placed, (), [], state, orders, cycles, head)

        def steps_from(i, rest, placed, seq, actions, state, orders, cycles, head):
            fresh = not placed
            if _sequence_done(rest, fresh):
                cycle = DesignCycle(head.label, head.available_modules, head.carried_assemblies, tuple(actions))
                yield from cycles_from(i + 1, placed, rest, orders + (list(seq),), cycles + [cycle], state)
                return
            n = sum(len(o) for o in orders) + len(seq) + 1
            for step in _next_steps(model, rest, placed, fresh):
                acts = _step_actions(model, step, placed, n, n)
                branch = state.copy()
                for a in acts:
                    branch.run_action(a)
                yield from steps_from(i, [m for m in rest if m not in step], placed | set(step),
                                      seq + (step,), actions + list(acts), branch, orders, cycles, head)

        yield from cycles_from(0, frozenset(), [], (), [], Replay(model))


def _optimize_exhaustive(model, objective, max_cycles, keep):
    scored = list(_scored_space(model, objective, max_cycles))
    if not scored:
        raise OptimizerError("no feasible plan exists under the precedence constraints")
    best_value = min(s[0] for s in scored)
    # ties within float noise are broken by serialized plan identity; plans
    # are only materialized for the entries that can make it into the report
    scored.sort(key=lambda s: (0 if _same(s[0], best_value) else 1, s[0]))
    cutoff = scored[:keep][-1][0]
    head = [s for s in scored if s[0] <= cutoff or _same(s[0], cutoff) or _same(s[0], best_value)]
    ranked = []
    for value, k, blocks, orders in head:
        plan = _plan_from_steps(model, blocks, orders, name=plan_signature(blocks, orders))
        ranked.append((value, plan_identity(plan), plan, k))
    ranked.sort(key=lambda s: (0 if _same(s[0], best_value) else 1, s[0], s[1]))
    return ranked, len(scored)


def _greedy_area(model: ProductModel, cycles: list[tuple[list[str], list[Step]]]) -> float:
    blocks = [b for b, _ in cycles]
    orders = [o for _, o in cycles]
    plan = _plan_from_steps(model, blocks, orders)
    return simulate(model, plan).kpis.total_risk_area


def _optimize_greedy(model: ProductModel, max_cycles: int):
    ids = sorted(model.module_ids)
    cycles: list[tuple[list[str], list[Step]]] = [([], [])]
    placed: frozenset[str] = frozenset()
    explored = 0
    if len(ids) == 1:
        cycles = [(ids, [])]
        placed = frozenset(ids)

    def steps_from(placed, fresh):
        remaining = [m for m in ids if m not in placed]
        if fresh:
            return [(a, b) for a, b in itertools.combinations(remaining, 2)
                    if model.predecessors(a) <= placed | {b} and model.predecessors(b) <= placed | {a}]
        return [(m,) for m in remaining if model.predecessors(m) <= placed]

    def extended(cyc, step, new_cycle=False):
        out = [(list(b), list(o)) for b, o in cyc]
        if new_cycle:
            out.append(([], []))
        out[-1][0].extend(step)
        out[-1][1].append(step)
        return out

    while len(placed) < len(ids):
        fresh = not placed
        options = []
        for step in steps_from(placed, fresh):
            options.append((_greedy_area(model, extended(cycles, step)), 0, step))
            explored += 1
        if cycles[-1][1] and len(cycles) < max_cycles:
            # a break is scored together with the best first step of the new cycle
            look = [_greedy_area(model, extended(cycles, s, new_cycle=True)) for s in steps_from(placed, False)]
            explored += len(look)
            if look:
                options.append((min(look), 1, ()))
        if not options:
            raise OptimizerError("greedy search found no feasible step")
        best = min(o[0] for o in options)
        _, is_break, step = min((o for o in options if _same(o[0], best)), key=lambda o: (o[1], o[2]))
        if is_break:
            cycles.append(([], []))
        else:
            cycles = extended(cycles, step)
            placed = placed | set(step)
    blocks = [b for b, _ in cycles]
    orders = [o for _, o in cycles]
    return _plan_from_steps(model, blocks, orders, name=plan_signature(blocks, orders)), explored


def optimize(
    model: ProductModel,
    objective: StrategyObjective | str = "average_risk",
    max_cycles: int = 2,
    mode: str = "exhaustive",
    keep: int = 10,
) -> OptimizationResult:
    """Search for the plan minimizing ``objective`` with at most ``max_cycles`` cycles.

    ``exhaustive`` scores every ordered partition and step order (at most
    8 modules). ``greedy`` grows one plan step by step, taking the step or
    cycle break that adds the least risk area.
    """
    if isinstance(objective, str):
        objective = StrategyObjective(objective)
    if max_cycles < 1:
        raise OptimizerError("max_cycles must be at least 1")
    if not model.modules:
        raise OptimizerError("model has no modules")
    if mode == "exhaustive":
        if len(model.modules) > EXHAUSTIVE_LIMIT:
            raise OptimizerError(
                f"exhaustive search is limited to {EXHAUSTIVE_LIMIT} modules "
                f"(model has {len(model.modules)}); use mode='greedy'")
        ranked, explored = _optimize_exhaustive(model, objective, max_cycles, keep)
        best_value, _, best, _ = ranked[0]
        shown = [PlanScore(p.name, p, k) for _, _, p, k in ranked[:keep]]
    elif mode == "greedy":
        best, explored = _optimize_greedy(model, max_cycles)
        best_value, k = _score(model, best, objective)
        shown = [PlanScore(best.name, best, k)]
        baseline = build_conventional_plan(model)
        if plan_identity(baseline) != plan_identity(best):
            shown.append(PlanScore(baseline.name, baseline, simulate(model, baseline).kpis))
    else:
        raise OptimizerError(f"unknown mode {mode!r}")
    objectives = [StrategyObjective(k) for k in OBJECTIVE_KINDS]
    if objective.kind == "weighted":
        objectives.append(objective)
    return OptimizationResult(best, objective, best_value, explored, _report(shown, objectives))
