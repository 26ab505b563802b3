from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from itrisk import bundled  # noqa: E402
from itrisk.serialize import load_model, load_plan  # noqa: E402

ACCEPTANCE_RESULTS: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    outcome = "PASS" if call.excinfo is None else "FAIL"
    previous = ACCEPTANCE_RESULTS.get(number)
    if previous and previous[0] == "FAIL":
        outcome = "FAIL"
    ACCEPTANCE_RESULTS[number] = (outcome, title)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        outcome, title = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"[{outcome}] criterion {number}: {title}")


@pytest.fixture(scope="session")
def mds():
    return load_model(bundled("mds_model.json"))


@pytest.fixture(scope="session")
def scheme1():
    return load_plan(bundled("scheme1.json"))


@pytest.fixture(scope="session")
def scheme2():
    return load_plan(bundled("scheme2.json"))


@pytest.fixture(scope="session")
def mds_doc():
    return json.loads(bundled("mds_model.json").read_text())


@pytest.fixture(scope="session")
def scheme2_doc():
    return json.loads(bundled("scheme2.json").read_text())
