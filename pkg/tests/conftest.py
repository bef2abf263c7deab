from pathlib import Path

import pytest

from gbach.parser import parse_program

HERE = Path(__file__).parent


@pytest.fixture(scope="session")
def truck_source():
    return (HERE / "vertical_truck.gbach").read_text()


@pytest.fixture
def truck(truck_source):
    return parse_program(truck_source, source="vertical_truck.gbach")


@pytest.fixture
def empty_prog():
    return parse_program("")


_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        prev = _acceptance.get(report.nodeid)
        if prev is None or prev[0]:
            _acceptance[report.nodeid] = (report.passed, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (ok, secs) in sorted(_acceptance.items(), key=lambda kv: int(kv[0].split("_")[3])):
        name = nodeid.split("::")[-1].removeprefix("test_criterion_")
        num, _, title = name.partition("_")
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {num}. {title.replace('_', ' ')} ({secs:.2f} s)")
