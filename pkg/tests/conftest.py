from __future__ import annotations

from pathlib import Path

import pytest

from thingc.corpus import corpus_manifest, entry
from thingc.dsl import parse_file


@pytest.fixture(scope="session")
def manifest():
    return corpus_manifest()


@pytest.fixture(scope="session")
def load():
    cache = {}

    def get(name: str):
        if name not in cache:
            cache[name] = parse_file(entry(name).path)
        return cache[name]

    return get


def pytest_addoption(parser):
    parser.addoption("--update-golden", action="store_true", help="rewrite golden files")


@pytest.fixture
def update_golden(request) -> bool:
    return request.config.getoption("--update-golden")


GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def golden(update_golden):
    """Compare text with ``tests/golden/<name>``; rewrite it under ``--update-golden``."""

    def check(name: str, text: str) -> None:
        path = GOLDEN / name
        if update_golden:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
            return
        assert path.exists(), f"missing golden file {path}; run pytest --update-golden"
        assert text == path.read_text(encoding="utf-8"), f"{name} differs from golden copy"

    return check


# acceptance reporting: one pass/fail line per criterion in the terminal summary

ACCEPTANCE: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (report.when != "call" and report.passed):
        return
    number, title = marker.args
    entry = ACCEPTANCE.setdefault(number, {"title": title, "ok": True, "tests": 0, "seconds": 0.0})
    if report.when == "call":
        entry["tests"] += 1
        entry["seconds"] += report.duration
    entry["ok"] = entry["ok"] and report.passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        e = ACCEPTANCE[number]
        status = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(
            f"criterion {number:>2}: {status}  {e['title']} ({e['tests']} test(s), {e['seconds']:.2f}s)")
