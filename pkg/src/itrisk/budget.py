"""Resource-budget arithmetic for a sonar detection pipeline.

All times are in seconds, rates in Hz or bytes/s, memory in bits.
1 KiB = 8192 bits and 1 MiB = 1024 KiB.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

MAX_COUNT = 2**63 - 1
BITS_PER_KIB = 8 * 1024
BITS_PER_MIB = BITS_PER_KIB * 1024
FFT_REFERENCE_POINTS = 1024

# guards float quotients that should be exact integers (3.0000000000000004 -> 3)
_EPS = 1e-9


class BudgetConfigError(ValueError):
    """A stage is missing a parameter its kind requires."""


@dataclass(frozen=True)
class PipelineStage:
    name: str
    kind: str
    deadline: float
    params: Mapping[str, Any] = field(default_factory=dict)
    channels: int = 1
    word_bits: int = 16


@dataclass(frozen=True)
class ProcessorBenchmark:
    """Device timings; ``fir_per_tap_time`` doubles as the generic per-op time."""

    name: str
    fft_1k_complex_time: float
    fir_per_tap_time: float
    io_rate: float
    cores_per_board: int


@dataclass(frozen=True)
class SignalContext:
    sample_rate: float
    sound_speed: float = 1500.0
    pri: float = 1.0
    beams: int = 1
    buffer_interval: float | None = None


@dataclass(frozen=True)
class StageBudget:
    name: str
    kind: str
    op_count: int
    units: int
    per_unit_deadline: float
    time_per_op: float
    scaled_stage_time: float
    required_processors: int
    feasible: bool


@dataclass(frozen=True)
class BudgetReport:
    stages: tuple[StageBudget, ...]
    total_processors: int
    boards: int
    acquisition_memory_bits: int
    buffer_bits: int
    samples_per_interval: int
    input_data_rate: float
    io_rate: float

    @property
    def feasible(self) -> bool:
        return all(s.feasible for s in self.stages)

    def as_dict(self) -> dict:
        return {
            "stages": [vars(s) for s in self.stages],
            "totals": {
                "processors": self.total_processors,
                "boards": self.boards,
                "acquisition_memory_bits": self.acquisition_memory_bits,
                "acquisition_memory_kib": self.acquisition_memory_bits / BITS_PER_KIB,
                "buffer_bits": self.buffer_bits,
                "buffer_kib": self.buffer_bits / BITS_PER_KIB,
                "samples_per_interval": self.samples_per_interval,
                "input_data_rate": self.input_data_rate,
                "io_rate": self.io_rate,
            },
            "feasible": self.feasible,
        }


def _require_positive(**values) -> None:
    for name, v in values.items():
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v!r}")


def _require_count(**values) -> None:
    for name, v in values.items():
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ValueError(f"{name} must be an integer >= 1, got {v!r}")


def _checked_product(*factors: int) -> int:
    out = math.prod(factors)
    if out > MAX_COUNT:
        raise OverflowError(f"operation count {out} exceeds {MAX_COUNT}")
    return out


def _ceil(x: float) -> int:
    return math.ceil(x - _EPS * max(1.0, abs(x)))


def _floor(x: float) -> int:
    return math.floor(x + _EPS * max(1.0, abs(x)))


def per_unit_deadline(total_deadline: float, units: int) -> float:
    _require_count(units=units)
    return total_deadline / units


def correlation_op_count(points: int, channels: int, refs: int) -> int:
    _require_count(points=points, channels=channels, refs=refs)
    return _checked_product(points, channels, refs)


def cfar_op_count(window_cells: int, channels: int, refs: int) -> int:
    _require_count(window_cells=window_cells, channels=channels, refs=refs)
    return _checked_product(window_cells, channels, refs)


def time_per_op(deadline: float, ops: int) -> float:
    _require_count(ops=ops)
    return deadline / ops


def is_power_of_two(n: int) -> bool:
    return isinstance(n, int) and n >= 1 and n & (n - 1) == 0


def fft_time_scaled(bench: ProcessorBenchmark, n: int) -> float:
    """Radix-2 FFT time for ``n`` points, scaled as n*log2(n) from the 1K benchmark."""
    if not is_power_of_two(n) or n < 2:
        raise ValueError(f"FFT size must be a power of two >= 2, got {n!r}")
    ref = FFT_REFERENCE_POINTS * math.log2(FFT_REFERENCE_POINTS)
    return bench.fft_1k_complex_time * (n * math.log2(n)) / ref


def required_processors(stage_time_per_unit: float, deadline_per_unit: float) -> int:
    _require_positive(stage_time_per_unit=stage_time_per_unit, deadline_per_unit=deadline_per_unit)
    return max(1, _ceil(stage_time_per_unit / deadline_per_unit))


def buffer_bits(sample_rate: float, interval: float, word_bits: int, channels: int) -> tuple[int, int]:
    """``(bits, samples_per_interval)`` buffered per interval across all channels."""
    _require_positive(sample_rate=sample_rate, interval=interval, word_bits=word_bits, channels=channels)
    samples = _floor(sample_rate * interval)
    return samples * word_bits * channels, samples


def acquisition_memory_bits(n_points: int, channels: int, word_bits: int) -> int:
    _require_count(n_points=n_points, channels=channels, word_bits=word_bits)
    return _checked_product(n_points, channels, word_bits)


def range_resolution_to_deadline(resolution_m: float, sound_speed_mps: float = 1500.0) -> float:
    """Two-way travel time across one range-resolution cell."""
    _require_positive(resolution_m=resolution_m, sound_speed_mps=sound_speed_mps)
    return 2.0 * resolution_m / sound_speed_mps


def doppler_reference_count(span_hz: float, step_hz: float) -> int:
    _require_positive(span_hz=span_hz, step_hz=step_hz)
    if span_hz < step_hz:
        raise ValueError("Doppler span must be at least one step")
    return _ceil(span_hz / step_hz)


def board_count(processors: int, cores_per_board: int) -> int:
    _require_count(processors=processors, cores_per_board=cores_per_board)
    return -(-processors // cores_per_board)


def bits_to_kib(bits: int) -> float:
    return bits / BITS_PER_KIB


def bits_to_mib(bits: int) -> float:
    return bits / BITS_PER_MIB


def _param(stage: PipelineStage, key: str, default: Any = None) -> Any:
    if key in stage.params:
        return stage.params[key]
    if default is None:
        raise BudgetConfigError(f"stage {stage.name!r} ({stage.kind}) needs parameter {key!r}")
    return default


def analyze_stage(stage: PipelineStage, bench: ProcessorBenchmark, processor_limit: int | None = None) -> StageBudget:
    """Op count, deadlines and processor requirement for one stage.

    FFT work is sized per channel from the scaled FFT benchmark; correlation,
    CFAR and custom stages are sized from their total op count at the
    benchmark's per-op time; PDP gets a fixed budget per target.
    """
    _require_count(channels=stage.channels, word_bits=stage.word_bits)
    _require_positive(deadline=stage.deadline)
    op_time = bench.fir_per_tap_time
    kind = stage.kind
    if kind == "fft":
        n = _param(stage, "n_points")
        units = stage.channels
        unit_time = fft_time_scaled(bench, n)
        ops = _checked_product(stage.channels, n, int(math.log2(n)))
    elif kind == "correlation" and stage.params.get("method", "direct") == "fft":
        n = _param(stage, "n_points")
        units = stage.channels
        unit_time = 2 * fft_time_scaled(bench, n) + n * op_time
        ops = _checked_product(stage.channels, 2 * n * int(math.log2(n)) + n)
    elif kind == "correlation":
        ops = correlation_op_count(_param(stage, "points"), stage.channels, _param(stage, "refs"))
        units = 1
        unit_time = ops * op_time
    elif kind == "cfar":
        ops = cfar_op_count(_param(stage, "window_cells"), stage.channels, _param(stage, "refs"))
        units = 1
        unit_time = ops * op_time
    elif kind == "pdp":
        units = _param(stage, "max_targets")
        per_target = _param(stage, "ops_per_target", 1)
        _require_count(max_targets=units, ops_per_target=per_target)
        ops = _checked_product(units, per_target)
        unit_time = per_target * op_time
    elif kind == "custom":
        ops = _param(stage, "op_count")
        _require_count(op_count=ops)
        units = 1
        unit_time = ops * op_time
    else:
        raise BudgetConfigError(f"stage {stage.name!r} has unknown kind {kind!r}")

    unit_deadline = per_unit_deadline(stage.deadline, units)
    procs = required_processors(unit_time, unit_deadline)
    feasible = procs * unit_deadline >= unit_time * (1 - _EPS)
    if processor_limit is not None and procs > processor_limit:
        feasible = False
    return StageBudget(
        name=stage.name,
        kind=kind,
        op_count=ops,
        units=units,
        per_unit_deadline=unit_deadline,
        time_per_op=time_per_op(stage.deadline, ops),
        scaled_stage_time=unit_time,
        required_processors=procs,
        feasible=feasible,
    )


def analyze_pipeline(
    stages: Sequence[PipelineStage],
    bench: ProcessorBenchmark,
    ctx: SignalContext,
    processor_limit: int | None = None,
) -> BudgetReport:
    """Per-stage budgets plus processor, board and memory totals.

    Acquisition memory covers one FFT frame for every FFT-based stage. The
    input buffer holds ``ctx.buffer_interval`` of samples (the first stage's
    deadline when unset) for the widest stage.
    """
    if not stages:
        raise ValueError("pipeline has no stages")
    per_stage = tuple(analyze_stage(s, bench, processor_limit) for s in stages)
    total = sum(s.required_processors for s in per_stage)

    acquisition = 0
    for s in stages:
        if s.kind == "fft" or (s.kind == "correlation" and s.params.get("method") == "fft"):
            acquisition += acquisition_memory_bits(s.params["n_points"], s.channels, s.word_bits)

    widest = max(stages, key=lambda s: s.channels)
    interval = ctx.buffer_interval if ctx.buffer_interval is not None else stages[0].deadline
    buf, samples = buffer_bits(ctx.sample_rate, interval, widest.word_bits, widest.channels)
    return BudgetReport(
        stages=per_stage,
        total_processors=total,
        boards=board_count(total, bench.cores_per_board),
        acquisition_memory_bits=acquisition,
        buffer_bits=buf,
        samples_per_interval=samples,
        input_data_rate=ctx.sample_rate * widest.channels * widest.word_bits / 8,
        io_rate=bench.io_rate,
    )


def format_report(report: BudgetReport) -> str:
    """Aligned plain-text rendering of a budget report."""
    header = ("stage", "kind", "ops", "unit deadline", "time/op", "unit time", "procs", "ok")
    rows = [header]
    for s in report.stages:
        rows.append((
            s.name, s.kind, f"{s.op_count:,}", _si(s.per_unit_deadline), _si(s.time_per_op),
            _si(s.scaled_stage_time), str(s.required_processors), "yes" if s.feasible else "NO",
        ))
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))) for r in rows]
    lines.append("")
    lines.append(f"processors  {report.total_processors}")
    lines.append(f"boards      {report.boards}")
    lines.append(f"acquisition {report.acquisition_memory_bits:,} bits ({bits_to_kib(report.acquisition_memory_bits):.1f} KiB)")
    lines.append(f"buffer      {report.buffer_bits:,} bits ({bits_to_kib(report.buffer_bits):.1f} KiB, "
                 f"{report.samples_per_interval} samples/channel)")
    lines.append(f"input rate  {report.input_data_rate:,.0f} B/s (device I/O {report.io_rate:,.0f} B/s)")
    lines.append(f"feasible    {'yes' if report.feasible else 'NO'}")
    return "\n".join(lines) + "\n"


def _si(seconds: float) -> str:
    for scale, unit in ((1.0, "s"), (1e-3, "ms"), (1e-6, "us"), (1e-9, "ns")):
        if seconds >= scale:
            return f"{seconds / scale:.4g} {unit}"
    return f"{seconds / 1e-12:.4g} ps"
