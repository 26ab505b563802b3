"""JSON documents: schemas, parsing into domain objects, and stable dumps."""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any

import jsonschema

from .budget import PipelineStage, ProcessorBenchmark, SignalContext
from .model import InterfaceDef, ModuleDef, ProductModel
from .riskengine import DesignCycle, IntegrationPlan, PlanAction
from .testset import TestCase, TestSetRegistry

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_str_list = {"type": "array", "items": {"type": "string"}}

MODEL_SCHEMA = {
    "type": "object",
    "required": ["modules"],
    "properties": {
        "modules": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "properties": {"id": {"type": "string"}, "name": {"type": "string"}, "p": _num, "impact": _num},
                "additionalProperties": False,
            },
        },
        "interfaces": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["a", "b"],
                "properties": {"a": {"type": "string"}, "b": {"type": "string"}, "p": _num, "impact": _num},
                "additionalProperties": False,
            },
        },
        "precedence": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
        },
        "default_impact": _pos,
    },
    "additionalProperties": False,
}

_action = {
    "type": "object",
    "required": ["type", "id", "assembly"],
    "properties": {
        "type": {"enum": ["integrate", "test"]},
        "id": {"type": "string"},
        "assembly": {"type": "string"},
        "add": _str_list,
        "merge": _str_list,
        "interfaces": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
        },
        "duration": {"type": "integer", "minimum": 1},
        "cost": {"type": "number", "minimum": 0},
        "effectiveness": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    },
    "additionalProperties": False,
}

PLAN_SCHEMA = {
    "type": "object",
    "required": ["cycles"],
    "properties": {
        "name": {"type": "string"},
        "cycles": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["label"],
                "properties": {
                    "label": {"type": "string"},
                    "available": _str_list,
                    "carry_in": _str_list,
                    "actions": {"type": "array", "items": _action},
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

PIPELINE_SCHEMA = {
    "type": "object",
    "required": ["stages", "context"],
    "properties": {
        "stages": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "kind", "deadline"],
                "properties": {
                    "name": {"type": "string"},
                    "kind": {"enum": ["fft", "correlation", "cfar", "pdp", "custom"]},
                    "params": {"type": "object"},
                    "channels": {"type": "integer", "minimum": 1},
                    "deadline": _pos,
                    "word_bits": {"type": "integer", "minimum": 1},
                },
                "additionalProperties": False,
            },
        },
        "context": {
            "type": "object",
            "required": ["sample_rate"],
            "properties": {
                "sample_rate": _pos,
                "sound_speed": _pos,
                "pri": _pos,
                "beams": {"type": "integer", "minimum": 1},
                "buffer_interval": _pos,
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

BENCHMARK_SCHEMA = {
    "type": "object",
    "required": ["fft_1k_complex_time", "fir_per_tap_time", "io_rate", "cores_per_board"],
    "properties": {
        "name": {"type": "string"},
        "fft_1k_complex_time": _pos,
        "fir_per_tap_time": _pos,
        "io_rate": _pos,
        "cores_per_board": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}

REGISTRY_SCHEMA = {
    "type": "object",
    "required": ["versions", "requirements", "cases"],
    "properties": {
        "versions": _str_list,
        "requirements": {"type": "object", "additionalProperties": _str_list},
        "cases": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "tags", "introduced_in"],
                "properties": {"id": {"type": "string"}, "tags": _str_list, "introduced_in": {"type": "string"}},
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

# -- emitted reports -------------------------------------------------------

_kpis = {
    "type": "object",
    "required": ["phi", "cost", "remaining_risk", "total_risk_area", "average_risk", "max_risk"],
    "properties": {k: _num for k in ("phi", "cost", "remaining_risk", "total_risk_area", "average_risk", "max_risk")},
    "additionalProperties": False,
}
_comparison = {
    "plans": {"type": "array", "items": {
        "type": "object", "required": ["label", "kpis"],
        "properties": {"label": {"type": "string"}, "kpis": _kpis}, "additionalProperties": False}},
    "baseline": {"type": "string"},
    "deltas": {"type": "object", "additionalProperties": {"type": "object", "additionalProperties": _num}},
    "winners": {"type": "object", "additionalProperties": {"type": "string"}},
}

REPORT_SCHEMAS = {
    "simulate": {
        "type": "object",
        "required": ["plan", "kpis", "profile", "events", "warnings"],
        "properties": {
            "plan": {"type": "string"},
            "kpis": _kpis,
            "profile": {"type": "array", "items": {
                "type": "array", "prefixItems": [{"type": "integer", "minimum": 1}, {"type": "number", "minimum": 0}],
                "minItems": 2, "maxItems": 2}},
            "events": {"type": "array", "items": {
                "type": "object", "required": ["tick", "kind", "action", "opened", "cleared", "note"]}},
            "warnings": _str_list,
        },
        "additionalProperties": False,
    },
    "compare": {
        "type": "object",
        "required": ["plans", "baseline", "deltas", "winners", "objective", "winner"],
        "properties": {**_comparison, "objective": {"type": "string"}, "winner": {"type": "string"}},
        "additionalProperties": False,
    },
    "optimize": {
        "type": "object",
        "required": ["plans", "baseline", "deltas", "winners", "objective", "mode", "max_cycles",
                     "explored", "best", "score", "best_plan"],
        "properties": {
            **_comparison,
            "objective": {"type": "string"},
            "mode": {"enum": ["exhaustive", "greedy"]},
            "max_cycles": {"type": "integer", "minimum": 1},
            "explored": {"type": "integer", "minimum": 0},
            "best": {"type": "string"},
            "score": _num,
            "best_plan": PLAN_SCHEMA,
        },
        "additionalProperties": False,
    },
    "budget": {
        "type": "object",
        "required": ["stages", "totals", "feasible"],
        "properties": {
            "stages": {"type": "array", "minItems": 1, "items": {
                "type": "object",
                "required": ["name", "kind", "op_count", "units", "per_unit_deadline", "time_per_op",
                             "scaled_stage_time", "required_processors", "feasible"]}},
            "totals": {"type": "object", "required": ["processors", "boards", "acquisition_memory_bits",
                                                      "buffer_bits"]},
            "feasible": {"type": "boolean"},
        },
        "additionalProperties": False,
    },
    "reuse": {
        "type": "object",
        "required": ["from", "to", "reusable", "uncovered_tags"],
        "properties": {"from": {"type": "string"}, "to": {"type": "string"},
                       "reusable": _str_list, "uncovered_tags": _str_list},
        "additionalProperties": False,
    },
    "cover": {
        "type": "object",
        "required": ["version", "cover", "overlaps"],
        "properties": {
            "version": {"type": "string"},
            "cover": _str_list,
            "overlaps": {"type": "array", "items": {
                "type": "object", "required": ["cases", "tags"],
                "properties": {"cases": _str_list, "tags": _str_list}, "additionalProperties": False}},
        },
        "additionalProperties": False,
    },
}


class InputError(ValueError):
    """An input document failed to parse or validate."""

    def __init__(self, source: str, path: str, message: str):
        self.source, self.path, self.message = source, path, message
        super().__init__(f"{source}: {path}: {message}")


def _json_path(err: jsonschema.ValidationError) -> str:
    out = "$"
    for part in err.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def check_schema(doc: Any, schema: dict, source: str = "<document>") -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise InputError(source, _json_path(err), err.message)


def read_json(path: str | os.PathLike, schema: dict | None = None) -> Any:
    source = str(path)
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(source, "$", "file not found") from None
    except json.JSONDecodeError as exc:
        raise InputError(source, f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    if schema is not None:
        check_schema(doc, schema, source)
    return doc


# -- product model ---------------------------------------------------------

def model_from_dict(doc: dict, source: str = "<model>") -> ProductModel:
    check_schema(doc, MODEL_SCHEMA, source)
    return ProductModel(
        modules=tuple(
            ModuleDef(m["id"], m.get("name", m["id"]), m.get("p", 1.0), m.get("impact", 1.0))
            for m in doc["modules"]
        ),
        interfaces=tuple(
            InterfaceDef(i["a"], i["b"], i.get("p", 1.0), i.get("impact", 1.0))
            for i in doc.get("interfaces", [])
        ),
        precedence=tuple(tuple(e) for e in doc.get("precedence", [])),
        default_impact=doc.get("default_impact", 1.0),
    )


def model_to_dict(m: ProductModel) -> dict:
    doc = {
        "modules": [
            {"id": x.id, "name": x.name, "p": x.fault_probability, "impact": x.fault_impact} for x in m.modules
        ],
        "interfaces": [
            {"a": i.endpoint_a, "b": i.endpoint_b, "p": i.fault_probability, "impact": i.fault_impact}
            for i in m.interfaces
        ],
        "precedence": [list(e) for e in m.precedence],
    }
    if m.default_impact != 1.0:
        doc["default_impact"] = m.default_impact
    return doc


def load_model(path: str | os.PathLike) -> ProductModel:
    return model_from_dict(read_json(path), str(path))


# -- integration plan ------------------------------------------------------

def _action_from_dict(d: dict) -> PlanAction:
    return PlanAction(
        kind=d["type"],
        id=d["id"],
        target_assembly=d["assembly"],
        added_modules=tuple(d.get("add", ())),
        introduced_interfaces=tuple(tuple(p) for p in d.get("interfaces", ())),
        merged_assemblies=tuple(d.get("merge", ())),
        duration=d.get("duration", 1),
        cost=float(d.get("cost", 1.0)),
        effectiveness=float(d.get("effectiveness", 1.0)),
    )


def plan_from_dict(doc: dict, source: str = "<plan>") -> IntegrationPlan:
    check_schema(doc, PLAN_SCHEMA, source)
    return IntegrationPlan(
        cycles=tuple(
            DesignCycle(
                label=c["label"],
                available_modules=tuple(c.get("available", ())),
                carried_assemblies=tuple(c.get("carry_in", ())),
                actions=tuple(_action_from_dict(a) for a in c.get("actions", ())),
            )
            for c in doc["cycles"]
        ),
        name=doc.get("name", ""),
    )


def _action_to_dict(a: PlanAction) -> dict:
    d: dict[str, Any] = {"type": a.kind, "id": a.id, "assembly": a.target_assembly}
    if a.kind == "integrate":
        d["add"] = list(a.added_modules)
        d["interfaces"] = [list(p) for p in a.introduced_interfaces]
        if a.merged_assemblies:
            d["merge"] = list(a.merged_assemblies)
    d["duration"] = a.duration
    d["cost"] = a.cost
    if a.kind == "test":
        d["effectiveness"] = a.effectiveness
    return d


def plan_to_dict(plan: IntegrationPlan, with_name: bool = True) -> dict:
    doc: dict[str, Any] = {}
    if with_name and plan.name:
        doc["name"] = plan.name
    doc["cycles"] = [
        {
            "label": c.label,
            "available": list(c.available_modules),
            "carry_in": list(c.carried_assemblies),
            "actions": [_action_to_dict(a) for a in c.actions],
        }
        for c in plan.cycles
    ]
    return doc


def plan_identity(plan: IntegrationPlan) -> str:
    """Serialized plan content (name excluded), used for deterministic tie-breaks.

    Module sets and interface pairs are unordered, so they are written sorted.
    """
    doc = plan_to_dict(plan, with_name=False)
    for cycle in doc["cycles"]:
        for action in cycle["actions"]:
            for key in ("add", "merge"):
                if key in action:
                    action[key] = sorted(action[key])
            if "interfaces" in action:
                action["interfaces"] = sorted(sorted(p) for p in action["interfaces"])
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def load_plan(path: str | os.PathLike) -> IntegrationPlan:
    return plan_from_dict(read_json(path), str(path))


# -- emission --------------------------------------------------------------

def round_floats(obj: Any, places: int = 6) -> Any:
    """Recursively round floats so emitted JSON has fixed precision.

    Values of magnitude 1 or more keep ``places`` decimals; smaller values
    keep ``places`` significant digits so budget times in seconds survive.
    """
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite value {obj!r} cannot be emitted")
        r = round(obj, places) if abs(obj) >= 1 else float(f"{obj:.{places}g}")
        return 0.0 if r == 0 else r
    if isinstance(obj, dict):
        return {k: round_floats(v, places) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, places) for v in obj]
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(round_floats(obj), indent=2, sort_keys=True) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to ``path`` through a temp file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- budget and registry documents -----------------------------------------

def pipeline_from_dict(doc: dict, source: str = "<pipeline>") -> tuple[list[PipelineStage], SignalContext]:
    check_schema(doc, PIPELINE_SCHEMA, source)
    stages = [
        PipelineStage(
            name=s["name"],
            kind=s["kind"],
            deadline=s["deadline"],
            params=dict(s.get("params", {})),
            channels=s.get("channels", 1),
            word_bits=s.get("word_bits", 16),
        )
        for s in doc["stages"]
    ]
    c = doc["context"]
    ctx = SignalContext(
        sample_rate=c["sample_rate"],
        sound_speed=c.get("sound_speed", 1500.0),
        pri=c.get("pri", 1.0),
        beams=c.get("beams", 1),
        buffer_interval=c.get("buffer_interval"),
    )
    return stages, ctx


def load_pipeline(path: str | os.PathLike):
    return pipeline_from_dict(read_json(path), str(path))


def benchmark_from_dict(doc: dict, source: str = "<benchmark>") -> ProcessorBenchmark:
    check_schema(doc, BENCHMARK_SCHEMA, source)
    return ProcessorBenchmark(
        name=doc.get("name", ""),
        fft_1k_complex_time=doc["fft_1k_complex_time"],
        fir_per_tap_time=doc["fir_per_tap_time"],
        io_rate=doc["io_rate"],
        cores_per_board=doc["cores_per_board"],
    )


def load_benchmark(path: str | os.PathLike):
    return benchmark_from_dict(read_json(path), str(path))


def registry_from_dict(doc: dict, source: str = "<registry>") -> TestSetRegistry:
    check_schema(doc, REGISTRY_SCHEMA, source)
    return TestSetRegistry(
        versions=list(doc["versions"]),
        cases=[TestCase(c["id"], frozenset(c["tags"]), c["introduced_in"]) for c in doc["cases"]],
        requirements={k: frozenset(v) for k, v in doc["requirements"].items()},
    )


def registry_to_dict(reg: TestSetRegistry) -> dict:
    return {
        "versions": list(reg.versions),
        "requirements": {k: sorted(v) for k, v in reg.requirements.items()},
        "cases": [{"id": c.id, "tags": sorted(c.tags), "introduced_in": c.introduced_in} for c in reg.cases],
    }


def load_registry(path: str | os.PathLike):
    return registry_from_dict(read_json(path), str(path))
