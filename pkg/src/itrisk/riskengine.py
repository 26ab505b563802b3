"""Discrete-time replay of an integration-and-test plan.

Time advances in integer ticks. Every design cycle opens with a single
availability tick; each action then occupies ``duration`` ticks and takes
effect on its last one. The risk sample for a tick is the total open risk
after all of that tick's events.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

from .model import FaultHypothesis, Pair, ProductModel, iface_key, risk_of

log = logging.getLogger(__name__)

ActionKind = Literal["integrate", "test"]


class PlanError(ValueError):
    """A plan cannot be replayed (structural problem)."""


class PlanReferenceError(PlanError):
    """A plan names a module or assembly that does not exist at that point."""


@dataclass(frozen=True)
class PlanAction:
    kind: ActionKind
    id: str
    target_assembly: str
    added_modules: tuple[str, ...] = ()
    introduced_interfaces: tuple[Pair, ...] = ()
    merged_assemblies: tuple[str, ...] = ()
    duration: int = 1
    cost: float = 1.0
    effectiveness: float = 1.0

    def __post_init__(self):
        # builders already pass tuples; only convert what arrives as lists
        if type(self.added_modules) is not tuple:
            object.__setattr__(self, "added_modules", tuple(self.added_modules))
        pairs = self.introduced_interfaces
        if type(pairs) is not tuple or any(type(p) is not tuple for p in pairs):
            object.__setattr__(self, "introduced_interfaces", tuple(tuple(p) for p in pairs))
        if type(self.merged_assemblies) is not tuple:
            object.__setattr__(self, "merged_assemblies", tuple(self.merged_assemblies))


@dataclass(frozen=True)
class DesignCycle:
    label: str
    available_modules: tuple[str, ...] = ()
    carried_assemblies: tuple[str, ...] = ()
    actions: tuple[PlanAction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "available_modules", tuple(self.available_modules))
        object.__setattr__(self, "carried_assemblies", tuple(self.carried_assemblies))
        object.__setattr__(self, "actions", tuple(self.actions))

    @property
    def duration(self) -> int:
        return 1 + sum(a.duration for a in self.actions)


@dataclass(frozen=True)
class IntegrationPlan:
    cycles: tuple[DesignCycle, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "cycles", tuple(self.cycles))

    @property
    def actions(self) -> list[PlanAction]:
        return [a for c in self.cycles for a in c.actions]

    @property
    def duration(self) -> int:
        return sum(c.duration for c in self.cycles)

    @property
    def cost(self) -> float:
        return math.fsum(a.cost for a in self.actions)


@dataclass(frozen=True)
class RiskProfile:
    samples: tuple[tuple[int, float], ...]

    @property
    def ticks(self) -> list[int]:
        return [t for t, _ in self.samples]

    @property
    def values(self) -> list[float]:
        return [r for _, r in self.samples]

    @property
    def max_risk(self) -> float:
        return max(self.values, default=0.0)

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class KpiReport:
    phi: int
    cost: float
    remaining_risk: float
    total_risk_area: float
    average_risk: float
    max_risk: float

    def as_dict(self) -> dict[str, float]:
        return {
            "phi": self.phi,
            "cost": self.cost,
            "remaining_risk": self.remaining_risk,
            "total_risk_area": self.total_risk_area,
            "average_risk": self.average_risk,
            "max_risk": self.max_risk,
        }


@dataclass(frozen=True, slots=True)
class Event:
    tick: int
    kind: str
    action: str
    opened: tuple[str, ...] = ()
    cleared: tuple[str, ...] = ()
    note: str = ""


class SimulationResult(NamedTuple):
    profile: RiskProfile
    kpis: KpiReport
    events: list[Event]


def hypothesis_label(h: FaultHypothesis) -> str:
    if h.kind == "interface":
        return "{}-{}".format(*h.location)
    return str(h.location)


@dataclass
class _AssemblyState:
    members: set[str] = field(default_factory=set)
    interfaces: set[Pair] = field(default_factory=set)
    residuals: set[tuple] = field(default_factory=set)
    retired: bool = False


class Replay:
    """Mutable simulation state, advanced one design cycle at a time.

    :func:`simulate` is the one-shot wrapper. Searches that score many plans
    sharing their first cycles can :meth:`copy` the state after a common
    prefix instead of replaying it for every plan.
    """

    def __init__(self, model: ProductModel):
        self.model = model
        self.known = set(model.module_ids)
        self.hyps: dict[tuple, FaultHypothesis] = {}
        self.available: set[str] = set()
        self.assemblies: dict[str, _AssemblyState] = {}
        self.owner: dict[str, str] = {}
        self.events: list[Event] = []
        # risk of every open hypothesis; the total is recomputed lazily
        self.open_risk: dict[tuple, float] = {}
        self._risk: float | None = 0.0
        self.samples: list[tuple[int, float]] = []
        self.tick = 0
        self.cycle_index = 0

    def copy(self) -> Replay:
        other = Replay.__new__(Replay)
        other.__dict__.update(self.__dict__)
        other.hyps = dict(self.hyps)
        other.available = set(self.available)
        other.assemblies = {
            aid: _AssemblyState(set(a.members), set(a.interfaces), set(a.residuals), a.retired)
            for aid, a in self.assemblies.items()
        }
        other.owner = dict(self.owner)
        other.events = list(self.events)
        other.open_risk = dict(self.open_risk)
        other.samples = list(self.samples)
        return other

    def run_cycle(self, cycle: DesignCycle) -> None:
        self.open_cycle(cycle)
        for action in cycle.actions:
            self.run_action(action)

    def open_cycle(self, cycle: DesignCycle) -> None:
        """The availability tick of ``cycle``; its actions are not run."""
        self.tick += 1
        self.availability(self.tick, self.cycle_index, cycle)
        self.samples.append((self.tick, self.risk()))
        self.cycle_index += 1

    def run_action(self, action: PlanAction) -> None:
        for _ in range(action.duration - 1):
            self.tick += 1
            self.samples.append((self.tick, self.risk()))
        self.tick += 1
        if action.kind == "integrate":
            self.integrate(self.tick, action)
        else:
            self.test(self.tick, action)
        self.samples.append((self.tick, self.risk()))

    def result(self, plan: IntegrationPlan) -> SimulationResult:
        """Profile, KPIs and events of the cycles run so far, which must be ``plan``'s."""
        profile = RiskProfile(tuple(self.samples))
        return SimulationResult(profile, kpis(profile, plan), list(self.events))

    def risk(self) -> float:
        if self._risk is None:
            self._risk = math.fsum(self.open_risk.values())
        return self._risk

    def _set(self, key: tuple, h: FaultHypothesis) -> None:
        self.hyps[key] = h
        if h.state == "open":
            self.open_risk[key] = risk_of(h)
        else:
            self.open_risk.pop(key, None)
        self._risk = None

    def _open(self, key: tuple, h: FaultHypothesis) -> str:
        self._set(key, h)
        return hypothesis_label(h)

    def availability(self, tick: int, cycle_index: int, cycle: DesignCycle) -> None:
        opened = []
        for mid in cycle.available_modules:
            if mid not in self.known:
                raise PlanReferenceError(f"cycle {cycle.label!r}: unknown module {mid!r}")
            if mid in self.available:
                raise PlanReferenceError(f"cycle {cycle.label!r}: module {mid!r} already available")
            self.available.add(mid)
            m = self.model.module(mid)
            opened.append(self._open(("module", mid), FaultHypothesis(
                "module", mid, m.fault_probability, m.fault_impact)))
        for aid in cycle.carried_assemblies:
            asm = self.assemblies.get(aid)
            if asm is None or asm.retired:
                raise PlanReferenceError(f"cycle {cycle.label!r}: unknown carried assembly {aid!r}")
            key = ("residual", aid, cycle_index)
            asm.residuals.add(key)
            opened.append(self._open(key, FaultHypothesis(
                "residual", aid, 1.0, self.model.default_impact)))
        self.events.append(Event(tick, "availability", cycle.label, tuple(opened)))

    def integrate(self, tick: int, a: PlanAction) -> None:
        if a.target_assembly in self.known:
            raise PlanReferenceError(f"{a.id}: assembly id {a.target_assembly!r} collides with a module id")
        target = self.assemblies.setdefault(a.target_assembly, _AssemblyState())
        if target.retired:
            raise PlanReferenceError(f"{a.id}: assembly {a.target_assembly!r} was merged away")
        if len(set(a.added_modules)) != len(a.added_modules):
            raise PlanReferenceError(f"{a.id}: module listed twice in one integration")
        for mid in a.added_modules:
            if mid not in self.known:
                raise PlanReferenceError(f"{a.id}: unknown module {mid!r}")
            if mid not in self.available:
                raise PlanReferenceError(f"{a.id}: module {mid!r} is not available yet")
            if mid in self.owner:
                raise PlanReferenceError(
                    f"{a.id}: module {mid!r} already belongs to assembly {self.owner[mid]!r}")
        for aid in a.merged_assemblies:
            other = self.assemblies.get(aid)
            if other is None or other.retired or aid == a.target_assembly:
                raise PlanReferenceError(f"{a.id}: cannot merge assembly {aid!r}")
            target.members |= other.members
            target.interfaces |= other.interfaces
            target.residuals |= other.residuals
            for mid in other.members:
                self.owner[mid] = a.target_assembly
            other.members, other.interfaces, other.residuals = set(), set(), set()
            other.retired = True
        for mid in a.added_modules:
            target.members.add(mid)
            self.owner[mid] = a.target_assembly

        allowed = target.members | {a.target_assembly, *a.merged_assemblies}
        opened = []
        for pair in a.introduced_interfaces:
            x, y = pair
            for end in (x, y):
                if end not in allowed:
                    raise PlanReferenceError(
                        f"{a.id}: interface endpoint {end!r} is not part of assembly {a.target_assembly!r}")
            if x == y:
                raise PlanReferenceError(f"{a.id}: interface endpoints are both {x!r}")
            key = iface_key(x, y)
            if ("interface", key) in self.hyps:
                raise PlanReferenceError(f"{a.id}: interface {key[0]}-{key[1]} integrated twice")
            spec = self.model.interface(x, y)
            if spec is None:
                h = FaultHypothesis("interface", key, 1.0, self.model.default_impact)
            else:
                h = FaultHypothesis("interface", key, spec.fault_probability, spec.fault_impact)
            target.interfaces.add(key)
            opened.append(self._open(("interface", key), h))
        self.events.append(Event(tick, "integrate", a.id, tuple(opened)))

    def test(self, tick: int, a: PlanAction) -> None:
        asm = self.assemblies.get(a.target_assembly)
        if asm is None:
            raise PlanReferenceError(f"{a.id}: unknown assembly {a.target_assembly!r}")
        if not asm.members:
            log.warning("%s: test on empty assembly %r ignored", a.id, a.target_assembly)
            self.events.append(Event(tick, "warning", a.id, note=f"empty assembly {a.target_assembly}"))
            return
        keys = [("module", m) for m in sorted(asm.members)]
        keys += [("interface", p) for p in sorted(asm.interfaces)]
        keys += sorted(asm.residuals)
        cleared = []
        for key in keys:
            if key in self.open_risk:
                h = self.hyps[key]
                self._set(key, h.cleared(a.effectiveness))
                cleared.append(hypothesis_label(h))
        self.events.append(Event(tick, "test", a.id, cleared=tuple(cleared)))


def _check_structure(plan: IntegrationPlan) -> None:
    if not plan.cycles:
        raise PlanError("plan has no design cycles (duration 0)")
    for a in plan.actions:
        if a.kind not in ("integrate", "test"):
            raise PlanError(f"{a.id}: unknown action kind {a.kind!r}")
        if not isinstance(a.duration, int) or a.duration < 1:
            raise PlanError(f"{a.id}: duration must be a positive integer, got {a.duration!r}")
        if a.kind == "test" and not 0.0 < a.effectiveness <= 1.0:
            raise PlanError(f"{a.id}: effectiveness {a.effectiveness!r} outside (0, 1]")


def simulate(model: ProductModel, plan: IntegrationPlan) -> SimulationResult:
    """Replay ``plan`` on ``model`` and return profile, KPIs and event log.

    Raises :class:`PlanReferenceError` for unknown modules or assemblies and
    :class:`PlanError` for an empty plan or malformed actions.
    """
    _check_structure(plan)
    state = Replay(model)
    for cycle in plan.cycles:
        state.run_cycle(cycle)
    return state.result(plan)


def kpis(profile: RiskProfile, plan: IntegrationPlan) -> KpiReport:
    """The five plan KPIs (plus peak risk) from a simulated profile.

    Total risk is the rectangle sum of the per-tick samples, so the average
    is exactly that sum over the duration.
    """
    values = profile.values
    phi = len(values)
    area = math.fsum(values)
    return KpiReport(
        phi=phi,
        cost=plan.cost,
        remaining_risk=values[-1] if values else 0.0,
        total_risk_area=area,
        average_risk=area / phi if phi else 0.0,
        max_risk=max(values, default=0.0),
    )
