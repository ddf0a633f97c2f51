"""Shared fixtures.

Every reducer is wrapped before test modules import it, so each witness
returned anywhere in the run is re-checked by the definition-level verifier.
Acceptance tests carry an ``acceptance(number, title)`` marker and get one
summary line each at the end of the run.
"""

from __future__ import annotations

import time

import pytest

import oraclelab.finite_degrees as fd

WITNESS_LOG: dict[str, int] = {"checked": 0, "failed": 0}
WITNESS_FAILURES: list[str] = []
_ACCEPTANCE: dict[int, tuple[str, str, float]] = {}


def _wrap(name: str) -> None:
    original = getattr(fd, name)

    def wrapped(f, g, *args, **kwargs):
        w = original(f, g, *args, **kwargs)
        if w is not None:
            problem = fd.verify_witness(f, g, w)
            WITNESS_LOG["checked"] += 1
            if problem:
                WITNESS_LOG["failed"] += 1
                WITNESS_FAILURES.append(f"{w.kind} {f.name}->{g.name}: {problem}")
        return w

    wrapped.__wrapped__ = original
    setattr(fd, name, wrapped)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")
    for name in ("reduce_em", "reduce_eW", "reduce_sW", "reduce_peW", "reduce_TW"):
        if not hasattr(getattr(fd, name), "__wrapped__"):
            _wrap(name)


@pytest.fixture
def witness_log():
    return WITNESS_LOG, WITNESS_FAILURES


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_call(item):
    start = time.perf_counter()
    yield
    item.user_properties.append(("elapsed", time.perf_counter() - start))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    elapsed = dict(item.user_properties).get("elapsed", 0.0)
    _ACCEPTANCE[number] = ("PASS" if report.passed else "FAIL", title, elapsed)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            verdict, title, elapsed = _ACCEPTANCE[number]
            terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {title}  ({elapsed:.1f}s)")
    terminalreporter.write_line(
        f"witnesses re-verified: {WITNESS_LOG['checked']}, failures: {WITNESS_LOG['failed']}")


def pytest_sessionfinish(session, exitstatus):
    if WITNESS_LOG["failed"] and session.exitstatus == 0:
        session.exitstatus = 1
