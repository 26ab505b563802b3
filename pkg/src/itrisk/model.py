"""Product model and fault-hypothesis risk state.

A product is a set of modules joined by interfaces, with a data-flow
precedence DAG between modules. Every module, interface and carried-over
assembly is a possible fault location; its risk is probability x impact
while the hypothesis is open.
"""
from __future__ import annotations

import graphlib
from dataclasses import dataclass, field, replace
from typing import Iterable, Literal

Pair = tuple[str, str]
HypothesisKind = Literal["module", "interface", "residual"]


def iface_key(a: str, b: str) -> Pair:
    """Canonical (unordered) identity of an interface between ``a`` and ``b``."""
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class ModuleDef:
    id: str
    name: str = ""
    fault_probability: float = 1.0
    fault_impact: float = 1.0

    @property
    def risk(self) -> float:
        return self.fault_probability * self.fault_impact


@dataclass(frozen=True)
class InterfaceDef:
    endpoint_a: str
    endpoint_b: str
    fault_probability: float = 1.0
    fault_impact: float = 1.0

    @property
    def key(self) -> Pair:
        return iface_key(self.endpoint_a, self.endpoint_b)


@dataclass(frozen=True)
class ProductModel:
    """Modules, the interface catalog and the data-flow precedence edges.

    ``default_impact`` applies to hypotheses the catalog does not describe:
    carried-assembly residuals and interfaces declared only in a plan.
    """

    modules: tuple[ModuleDef, ...]
    interfaces: tuple[InterfaceDef, ...] = ()
    precedence: tuple[Pair, ...] = ()
    default_impact: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "modules", tuple(self.modules))
        object.__setattr__(self, "interfaces", tuple(self.interfaces))
        object.__setattr__(self, "precedence", tuple(tuple(e) for e in self.precedence))
        # lookup tables; first declaration wins when ids are duplicated
        by_id: dict[str, ModuleDef] = {}
        for m in self.modules:
            by_id.setdefault(m.id, m)
        by_key: dict[Pair, InterfaceDef] = {}
        nbrs: dict[str, set[str]] = {}
        for i in self.interfaces:
            by_key.setdefault(i.key, i)
            nbrs.setdefault(i.endpoint_a, set()).add(i.endpoint_b)
            nbrs.setdefault(i.endpoint_b, set()).add(i.endpoint_a)
        preds: dict[str, set[str]] = {}
        for a, b in self.precedence:
            preds.setdefault(b, set()).add(a)
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_by_key", by_key)
        object.__setattr__(self, "_nbrs", {k: frozenset(v) for k, v in nbrs.items()})
        object.__setattr__(self, "_preds", {k: frozenset(v) for k, v in preds.items()})

    @property
    def module_ids(self) -> tuple[str, ...]:
        return tuple(m.id for m in self.modules)

    def module(self, module_id: str) -> ModuleDef:
        return self._by_id[module_id]

    def interface(self, a: str, b: str) -> InterfaceDef | None:
        return self._by_key.get(iface_key(a, b))

    def predecessors(self, module_id: str) -> frozenset[str]:
        return self._preds.get(module_id, frozenset())

    def neighbours(self, module_id: str) -> frozenset[str]:
        return self._nbrs.get(module_id, frozenset())

    def scale_impacts(self, factor: float) -> ProductModel:
        """Copy of the model with every fault impact multiplied by ``factor``."""
        return replace(
            self,
            modules=tuple(replace(m, fault_impact=m.fault_impact * factor) for m in self.modules),
            interfaces=tuple(replace(i, fault_impact=i.fault_impact * factor) for i in self.interfaces),
            default_impact=self.default_impact * factor,
        )


@dataclass(frozen=True, slots=True)
class FaultHypothesis:
    kind: HypothesisKind
    location: str | Pair
    probability: float = 1.0
    impact: float = 1.0
    state: Literal["open", "cleared"] = "open"

    @property
    def is_open(self) -> bool:
        return self.state == "open"

    def cleared(self, effectiveness: float = 1.0) -> FaultHypothesis:
        """Hypothesis after a test of the given effectiveness.

        A partial test leaves the fault open with its probability scaled by
        ``1 - effectiveness``; a cleared hypothesis never reopens.
        """
        if not self.is_open:
            return self
        if effectiveness >= 1.0:
            return FaultHypothesis(self.kind, self.location, self.probability, self.impact, "cleared")
        return FaultHypothesis(self.kind, self.location, self.probability * (1.0 - effectiveness), self.impact)


def risk_of(h: FaultHypothesis) -> float:
    """Risk carried by one fault hypothesis: P(x) * I(x) while open, else 0."""
    if h.state != "open":
        return 0.0
    return h.probability * h.impact


def total_risk(hypotheses: Iterable[FaultHypothesis]) -> float:
    return sum(risk_of(h) for h in hypotheses)


@dataclass(frozen=True)
class Assembly:
    id: str
    members: frozenset[str] = frozenset()
    internal_interfaces: frozenset[Pair] = frozenset()


@dataclass(frozen=True)
class Issue:
    code: str
    location: str
    message: str
    severity: Literal["error", "warning"] = "error"

    def __str__(self) -> str:
        return f"{self.severity}: [{self.code}] {self.location}: {self.message}"


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    def add(self, code: str, location: str, message: str, severity: str = "error") -> None:
        self.issues.append(Issue(code, location, message, severity))

    @property
    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "error"]

    @property
    def warnings(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        # truthy when there is something to report
        return bool(self.issues)

    def __iter__(self):
        return iter(self.issues)

    def __len__(self) -> int:
        return len(self.issues)


def _check_fault(report: ValidationReport, where: str, p: float, impact: float) -> None:
    if not 0.0 < p <= 1.0:
        report.add("probability-range", where, f"fault probability {p!r} outside (0, 1]")
    if not impact > 0.0:
        report.add("impact-range", where, f"fault impact {impact!r} must be positive")


def validate_model(m: ProductModel) -> ValidationReport:
    """Check id uniqueness, endpoint resolution and acyclic precedence.

    Violations are collected, never raised; an empty report means the model
    is usable.
    """
    report = ValidationReport()
    seen: set[str] = set()
    for idx, mod in enumerate(m.modules):
        where = f"modules[{idx}]"
        if not mod.id:
            report.add("empty-id", where, "module id is empty")
        elif mod.id in seen:
            report.add("duplicate-module", where, f"module id {mod.id!r} declared more than once")
        seen.add(mod.id)
        _check_fault(report, where, mod.fault_probability, mod.fault_impact)
    if not m.default_impact > 0.0:
        report.add("impact-range", "default_impact", f"default impact {m.default_impact!r} must be positive")

    ifaces: set[Pair] = set()
    for idx, i in enumerate(m.interfaces):
        where = f"interfaces[{idx}]"
        for end in (i.endpoint_a, i.endpoint_b):
            if end not in seen:
                report.add("unresolved-endpoint", where, f"interface endpoint {end!r} is not a declared module")
        if i.endpoint_a == i.endpoint_b:
            report.add("self-interface", where, f"interface endpoints are both {i.endpoint_a!r}")
        elif i.key in ifaces:
            report.add("duplicate-interface", where, f"interface {i.key[0]}-{i.key[1]} declared more than once")
        ifaces.add(i.key)
        _check_fault(report, where, i.fault_probability, i.fault_impact)

    sorter = graphlib.TopologicalSorter()
    for idx, (a, b) in enumerate(m.precedence):
        where = f"precedence[{idx}]"
        for end in (a, b):
            if end not in seen:
                report.add("unresolved-endpoint", where, f"precedence endpoint {end!r} is not a declared module")
        if a == b:
            report.add("cycle", where, f"self-loop {a}->{a}")
            continue
        sorter.add(b, a)
    try:
        sorter.prepare()
    except graphlib.CycleError as exc:
        cycle = exc.args[1]
        report.add("cycle", "precedence", "precedence cycle " + "->".join(reversed(cycle)))
    return report


def topological_order(m: ProductModel) -> list[str]:
    """Module ids in a deterministic precedence-respecting order (ties by id)."""
    preds = {mid: set(m.predecessors(mid)) for mid in m.module_ids}
    done: list[str] = []
    remaining = set(m.module_ids)
    while remaining:
        ready = sorted(x for x in remaining if preds[x] <= set(done))
        if not ready:
            raise ValueError("precedence graph has a cycle")
        done.append(ready[0])
        remaining.discard(ready[0])
    return done
