from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import pytest

from itrisk.cli import main
from itrisk.serialize import PLAN_SCHEMA, REPORT_SCHEMAS, check_schema, load_plan


@pytest.fixture()
def data(tmp_path) -> Path:
    out = tmp_path / "data"
    assert main(["export-data", str(out)]) == 0
    return out


def test_simulate_writes_csv(data, tmp_path, capsys):
    csv = tmp_path / "p.csv"
    code = main(["simulate", "--model", str(data / "mds_model.json"), "--plan", str(data / "scheme1.json"),
                 "--profile-csv", str(csv)])
    assert code == 0
    rows = csv.read_text().splitlines()
    assert rows[1] == "1,6.000000" and rows[9] == "9,0.000000"
    assert "R_AD=3.556" in capsys.readouterr().out


def test_simulate_inline_partition(data, tmp_path, capsys):
    report = tmp_path / "r.json"
    code = main(["simulate", "--model", str(data / "mds_model.json"),
                 "--partition", "DSP2,DAQ2,FFT/DSP4,CFAR2,PDP2", "--report", str(report)])
    assert code == 0
    doc = json.loads(report.read_text())
    assert [r for _, r in doc["profile"]] == [3, 4, 1, 2, 0, 4, 5, 1, 2, 0]


def test_compare_report(data, tmp_path, capsys):
    report = tmp_path / "cmp.json"
    code = main(["compare", "--model", str(data / "mds_model.json"), "--plan", str(data / "scheme1.json"),
                 "--plan", str(data / "scheme2.json"), "--report", str(report)])
    assert code == 0
    out = capsys.readouterr().out
    assert "R_AD=3.556" in out and "R_AD=2.200" in out
    doc = json.loads(report.read_text())
    kpis = {p["label"]: p["kpis"] for p in doc["plans"]}
    assert kpis["scheme1"]["average_risk"] == 3.555556 and kpis["scheme2"]["average_risk"] == 2.2
    assert kpis["scheme1"]["max_risk"] == 7 and kpis["scheme2"]["max_risk"] == 5
    assert doc["winner"] == "scheme2"


def test_optimize_plan_out_reparses(data, tmp_path, capsys):
    out = tmp_path / "best.json"
    code = main(["optimize", "--model", str(data / "mds_model.json"), "--objective", "max-risk",
                 "--plan-out", str(out)])
    assert code == 0
    check_schema(json.loads(out.read_text()), PLAN_SCHEMA)
    assert load_plan(out).cycles


def test_reports_reparse_under_schemas(data, tmp_path, capsys):
    model = str(data / "mds_model.json")
    runs = {
        "simulate": ["simulate", "--model", model, "--plan", str(data / "scheme2.json")],
        "compare": ["compare", "--model", model, "--plan", str(data / "scheme1.json"),
                    "--partition", "DSP2,DAQ2,FFT/DSP4,CFAR2,PDP2"],
        "optimize": ["optimize", "--model", model, "--mode", "greedy"],
        "budget": ["budget", "--pipeline", str(data / "mds_pipeline.json"),
                   "--benchmark", str(data / "tigersharc.json")],
        "reuse": ["testset", "reuse", "--registry", str(data / "mds_registry.json"), "--from", "k1", "--to", "k2"],
        "cover": ["testset", "cover", "--registry", str(data / "mds_registry.json"), "--version", "k1"],
    }
    for kind, argv in runs.items():
        path = tmp_path / f"{kind}.json"
        assert main(argv + ["--report", str(path)]) == 0, kind
        check_schema(json.loads(path.read_text()), REPORT_SCHEMAS[kind], kind)


def test_unknown_module_exits_1(data, tmp_path, capsys):
    doc = json.loads((data / "scheme2.json").read_text())
    doc["cycles"][0]["actions"][0]["add"] = ["DAQ9", "DSP2"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["simulate", "--model", str(data / "mds_model.json"), "--plan", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "DAQ9" in err and str(bad) in err


def test_schema_violation_exits_1(data, tmp_path, capsys):
    bad = tmp_path / "model.json"
    bad.write_text(json.dumps({"modules": "none"}))
    assert main(["validate", "--model", str(bad)]) == 1
    assert "$.modules" in capsys.readouterr().err


def test_invalid_model_exits_1(tmp_path, capsys):
    bad = tmp_path / "model.json"
    bad.write_text(json.dumps({"modules": [{"id": "A"}], "precedence": [["A", "A"]]}))
    assert main(["validate", "--model", str(bad)]) == 1
    assert "self-loop" in capsys.readouterr().out


def test_stop_criterion_exits_2(data, tmp_path, capsys):
    doc = json.loads((data / "scheme2.json").read_text())
    doc["cycles"][1]["actions"].pop()
    short = tmp_path / "short.json"
    short.write_text(json.dumps(doc))
    argv = ["--model", str(data / "mds_model.json"), "--plan", str(short)]
    assert main(["simulate", *argv]) == 2
    assert main(["validate", *argv]) == 2
    assert "stop-criterion" in capsys.readouterr().out


def test_infeasible_budget_exits_2(data, capsys):
    code = main(["budget", "--pipeline", str(data / "mds_pipeline.json"),
                 "--benchmark", str(data / "tigersharc.json"), "--processor-limit", "2"])
    assert code == 2
    assert "NO" in capsys.readouterr().out


def test_coverage_gap_exits_1(data, tmp_path, capsys):
    doc = json.loads((data / "mds_registry.json").read_text())
    doc["cases"] = [c for c in doc["cases"] if c["id"] != "TS06"]
    reg = tmp_path / "reg.json"
    reg.write_text(json.dumps(doc))
    assert main(["testset", "cover", "--registry", str(reg), "--version", "k2"]) == 1
    assert "replica-correlation" in capsys.readouterr().err


def test_exhaustive_refusal_exits_1(tmp_path, capsys):
    doc = {"modules": [{"id": f"M{i}"} for i in range(9)]}
    path = tmp_path / "big.json"
    path.write_text(json.dumps(doc))
    assert main(["optimize", "--model", str(path)]) == 1
    assert "greedy" in capsys.readouterr().err
    assert main(["optimize", "--model", str(path), "--mode", "greedy"]) == 0


def test_outputs_must_be_distinct(data, tmp_path, capsys):
    same = str(tmp_path / "x")
    argv = ["simulate", "--model", str(data / "mds_model.json"), "--plan", str(data / "scheme1.json"),
            "--profile-csv", same, "--svg", same]
    assert main(argv) == 1
    argv = ["simulate", "--model", str(data / "mds_model.json"), "--plan", str(data / "scheme1.json"),
            "--report", str(data / "scheme1.json")]
    assert main(argv) == 1


def test_invariant_breach_exits_3(data, monkeypatch, capsys):
    import itrisk.cli as cli

    real = cli.simulate

    def broken(model, plan):
        result = real(model, plan)
        return result._replace(kpis=dataclasses.replace(result.kpis, phi=99))

    monkeypatch.setattr(cli, "simulate", broken)
    code = main(["simulate", "--model", str(data / "mds_model.json"), "--plan", str(data / "scheme1.json")])
    assert code == 3
    assert "invariant" in capsys.readouterr().err


def test_help_per_subcommand(capsys):
    for sub in ("simulate", "compare", "optimize", "budget", "testset", "validate", "export-data"):
        with pytest.raises(SystemExit) as exc:
            main([sub, "--help"])
        assert exc.value.code == 0


@pytest.mark.parametrize("argv", [["simulate"], ["bogus"], ["testset", "cover", "--registry", "r.json"]])
def test_usage_errors_exit_1(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1
    assert "error:" in capsys.readouterr().err
