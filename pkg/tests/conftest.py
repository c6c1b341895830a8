from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent.parent / "src" / "disagree_kit" / "data"

_acceptance_results: list[tuple[str, str]] = []


@pytest.fixture(scope="session")
def zachary_path() -> Path:
    return DATA / "zachary.tsv"


@pytest.fixture(scope="session")
def path5_path() -> Path:
    return DATA / "path5.tsv"


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _acceptance_results.append((name, "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for name, outcome in _acceptance_results:
        terminalreporter.write_line(f"  [{outcome}] {name}")
