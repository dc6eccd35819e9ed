from __future__ import annotations

import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from synth import write_bank_csv  # noqa: E402

from reductminer.fetch import read_lock, verify  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent
_results: dict[int, dict] = {}


def _data_dir() -> Path:
    return Path(os.environ.get("REDUCTMINER_DATA", ROOT / "data"))


def bank_path(name: str) -> Path:
    """Path to a real bank-marketing file; fails the calling test when it is absent."""
    d = _data_dir()
    path = d / name
    if not path.is_file():
        pytest.fail(
            f"dataset missing: {name} not found in {d} "
            "(run `reductminer fetch --dest data` or set REDUCTMINER_DATA)",
            pytrace=False,
        )
    if read_lock(d):
        verify(d, {name: read_lock(d)[name]} if name in read_lock(d) else {})
    return path


@pytest.fixture(scope="session")
def synthetic_bank(tmp_path_factory) -> Path:
    return write_bank_csv(tmp_path_factory.mktemp("synth") / "bank.csv", 4521, seed=1)


@pytest.fixture(scope="session")
def synthetic_bank_full(tmp_path_factory) -> Path:
    return write_bank_csv(tmp_path_factory.mktemp("synth") / "bank-full.csv", 45211, seed=2)


@pytest.fixture
def notes(request):
    """Free-form lines attached to an acceptance test and echoed in the summary."""
    lines: list[str] = []
    request.node.user_properties.append(("notes", lines))
    return lines


def pytest_runtest_logreport(report):
    marker = dict(report.user_properties).get("criterion")
    if marker is None:
        return
    crit, title = marker
    entry = _results.setdefault(crit, {"title": title, "ok": True, "notes": [], "why": ""})
    if report.failed:
        entry["ok"] = False
        entry["why"] = str(report.longrepr).strip().splitlines()[-1][:200] if report.longrepr else ""
    if report.when == "call":
        entry["notes"].extend(dict(report.user_properties).get("notes", []))


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            item.user_properties.append(("criterion", (m.args[0], m.args[1])))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_results):
        e = _results[crit]
        tr.write_line(f"criterion {crit:>2}: {'PASS' if e['ok'] else 'FAIL'}  {e['title']}")
        if not e["ok"] and e["why"]:
            tr.write_line(f"              {e['why']}")
        for line in e["notes"]:
            tr.write_line(f"              {line}")
