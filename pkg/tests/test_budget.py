from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import repeated_sum
from itrisk import budget, bundled
from itrisk.budget import (
    BudgetConfigError,
    PipelineStage,
    ProcessorBenchmark,
    SignalContext,
    analyze_pipeline,
    format_report,
)
from itrisk.serialize import load_benchmark, load_pipeline

US, MS, NS, PS = 1e-6, 1e-3, 1e-9, 1e-12
BENCH = ProcessorBenchmark("bench", 16 * US, 8.3e-10, 1e9, 2)


@pytest.mark.parametrize("total, units, expected", [
    (3 * MS, 128, 23.4375 * US),
    (0.7, 1, 0.7),
    (128 * MS, 128, 1.0 * MS),
])
def test_per_unit_deadline(total, units, expected):
    assert budget.per_unit_deadline(total, units) == pytest.approx(expected, rel=1e-12)


def test_per_unit_deadline_needs_units():
    with pytest.raises(ValueError):
        budget.per_unit_deadline(1.0, 0)


@pytest.mark.parametrize("args, expected", [((1920, 128, 32), 7_864_320), ((1, 1, 1), 1), ((640, 64, 32), 1_310_720)])
def test_correlation_op_count(args, expected):
    assert budget.correlation_op_count(*args) == expected == repeated_sum(*args)


@pytest.mark.parametrize("args, expected", [((200, 128, 32), 819_200), ((1, 1, 1), 1), ((200, 64, 32), 409_600)])
def test_cfar_op_count(args, expected):
    assert budget.cfar_op_count(*args) == expected


def test_op_count_overflow():
    with pytest.raises(OverflowError):
        budget.correlation_op_count(2**40, 2**20, 2**10)


@pytest.mark.parametrize("deadline, ops, printed, tol", [
    (62.5 * US, 7_864_320, 8.0 * PS, 0.01),
    (3 * MS, 819_200, 3.6 * NS, 0.02),
    (1.0, 1, 1.0, 0.0),
])
def test_time_per_op(deadline, ops, printed, tol):
    assert math.isclose(budget.time_per_op(deadline, ops), printed, rel_tol=tol)


def test_time_per_op_exact_values():
    assert budget.time_per_op(62.5 * US, 7_864_320) == pytest.approx(7.947e-12, rel=1e-3)
    assert budget.time_per_op(3 * MS, 819_200) == pytest.approx(3.662e-9, rel=1e-3)


@pytest.mark.parametrize("n, expected", [(4096, 76.8 * US), (1024, 16 * US), (2048, 35.2 * US)])
def test_fft_time_scaled(n, expected):
    assert budget.fft_time_scaled(BENCH, n) == pytest.approx(expected, rel=1e-12)
    # butterfly-count ratio gives the same scaling
    butterflies = (n / 2) * math.log2(n) / ((1024 / 2) * 10)
    assert budget.fft_time_scaled(BENCH, n) == pytest.approx(16 * US * butterflies, rel=1e-12)


@pytest.mark.parametrize("n", [1000, 3, 0, 1])
def test_fft_rejects_non_power_of_two(n):
    with pytest.raises(ValueError):
        budget.fft_time_scaled(BENCH, n)


@pytest.mark.parametrize("time, deadline, expected", [
    (76.8 * US, 23.4375 * US, 4),
    (10 * US, 10 * US, 1),
    (76.8 * US, 23.4 * US, 4),
])
def test_required_processors(time, deadline, expected):
    assert budget.required_processors(time, deadline) == expected


def test_buffer_bits():
    assert budget.buffer_bits(16_000, 3 * MS, 16, 128) == (98_304, 48)
    assert budget.bits_to_kib(98_304) == 12
    assert budget.buffer_bits(16_000, 1e-9, 16, 128) == (0, 0)
    bits, _ = budget.buffer_bits(16_000, 3 * MS, 16, 64)
    assert bits == 49_152 and budget.bits_to_kib(bits) == 6


def test_acquisition_memory():
    assert budget.acquisition_memory_bits(4096, 128, 16) == 8_388_608
    assert budget.bits_to_mib(8_388_608) == 1
    assert budget.acquisition_memory_bits(1, 1, 1) == 1
    assert budget.bits_to_mib(budget.acquisition_memory_bits(4096, 64, 16)) == 0.5


@pytest.mark.parametrize("res, c, expected", [(2.25, 1500, 3 * MS), (0.75, 1500, 1 * MS), (90, 1500, 120 * MS)])
def test_range_resolution_to_deadline(res, c, expected):
    assert budget.range_resolution_to_deadline(res, c) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("span, step, expected", [(2000, 62.5, 32), (100, 100, 1), (2000, 60, 34)])
def test_doppler_reference_count(span, step, expected):
    assert budget.doppler_reference_count(span, step) == expected


@pytest.mark.parametrize("procs, cores, expected", [(8, 2, 4), (1, 2, 1), (5, 2, 3)])
def test_board_count(procs, cores, expected):
    assert budget.board_count(procs, cores) == expected


def mds_pipeline(channels: int = 128):
    stages, ctx = load_pipeline(bundled("mds_pipeline.json"))
    stages = [PipelineStage(s.name, s.kind, s.deadline, s.params, channels, s.word_bits) for s in stages]
    return stages, ctx


def test_mds_pipeline_report():
    stages, ctx = mds_pipeline()
    bench = load_benchmark(bundled("tigersharc.json"))
    report = analyze_pipeline(stages, bench, ctx)
    fft, cfar, pdp = report.stages
    assert fft.required_processors == 4 and fft.feasible
    assert fft.per_unit_deadline == pytest.approx(23.4375 * US)
    assert cfar.op_count == 819_200
    assert pdp.per_unit_deadline == pytest.approx(300 * US)
    assert report.acquisition_memory_bits == 8_388_608
    assert report.buffer_bits == 98_304 and report.samples_per_interval == 48
    assert report.feasible
    assert report.boards == budget.board_count(report.total_processors, 2)
    text = format_report(report)
    assert "4K FFT" in text and "98,304 bits" in text


def test_half_channels_halve_proportional_quantities():
    bench = load_benchmark(bundled("tigersharc.json"))
    stages, ctx = mds_pipeline(128)
    full = analyze_pipeline(stages, bench, ctx)
    stages, ctx = mds_pipeline(64)
    half = analyze_pipeline(stages, bench, ctx)
    assert half.acquisition_memory_bits * 2 == full.acquisition_memory_bits
    assert half.buffer_bits * 2 == full.buffer_bits
    for a, b in zip(full.stages, half.stages):
        if a.kind != "pdp":
            assert b.op_count * 2 == a.op_count


def test_single_custom_stage():
    stage = PipelineStage("one", "custom", 1.0, {"op_count": 1})
    report = analyze_pipeline([stage], BENCH, SignalContext(16_000))
    assert report.stages[0].required_processors == 1 and report.feasible


def test_missing_parameter_is_a_config_error():
    with pytest.raises(BudgetConfigError, match="window_cells"):
        analyze_pipeline([PipelineStage("c", "cfar", 1.0, {"refs": 32})], BENCH, SignalContext(16_000))


def test_processor_limit_flags_infeasible():
    stages, ctx = mds_pipeline()
    report = analyze_pipeline(stages, BENCH, ctx, processor_limit=2)
    assert not report.stages[0].feasible
    assert len(report.stages) == 3
    assert not report.feasible


def test_fft_correlation_method():
    stage = PipelineStage("corr", "correlation", 128 * MS, {"method": "fft", "n_points": 4096}, channels=128)
    result = budget.analyze_stage(stage, BENCH)
    assert result.per_unit_deadline == pytest.approx(1.0 * MS)
    assert result.scaled_stage_time == pytest.approx(2 * 76.8 * US + 4096 * 8.3e-10)
    assert result.required_processors == 1


counts = st.integers(min_value=1, max_value=5000)


@given(counts, counts, counts)
def test_op_counts_linear_in_channels(points, channels, refs):
    assert budget.correlation_op_count(points, 2 * channels, refs) == 2 * budget.correlation_op_count(points, channels, refs)
    assert budget.cfar_op_count(points, 3 * channels, refs) == 3 * budget.cfar_op_count(points, channels, refs)
    assert budget.acquisition_memory_bits(points, 2 * channels, 16) == 2 * budget.acquisition_memory_bits(points, channels, 16)


@given(st.integers(1, 512), st.integers(1, 64))
def test_buffer_linear_in_channels(channels, factor):
    one, _ = budget.buffer_bits(16_000, 3 * MS, 16, channels)
    many, _ = budget.buffer_bits(16_000, 3 * MS, 16, channels * factor)
    assert many == factor * one


times = st.floats(min_value=1e-9, max_value=1.0)


@given(times, times, times)
def test_required_processors_monotone(t, extra, deadline):
    assert budget.required_processors(t + extra, deadline) >= budget.required_processors(t, deadline)
    assert budget.required_processors(t, deadline + extra) <= budget.required_processors(t, deadline)


@given(st.integers(1, 1000))
def test_feasibility_matches_definition(ops):
    stage = PipelineStage("c", "custom", 1e-6, {"op_count": ops})
    result = budget.analyze_stage(stage, BENCH)
    assert result.feasible == (result.required_processors * result.per_unit_deadline
                               >= result.scaled_stage_time * (1 - 1e-9))
