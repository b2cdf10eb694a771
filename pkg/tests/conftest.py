import re

import pytest

from patkit.patterns import PatternSpec

P1_POLYS = ("0", "y", "2*y", "y^2")
P2_POLYS = ("0", "-y^2", "y^2", "y", "y^3", "y + y^3")
CUBIC_POLYS = ("0", "y", "2*y", "y^3", "2*y^3")


@pytest.fixture
def p1():
    return PatternSpec.from_strings(P1_POLYS, "P1")


@pytest.fixture
def p2():
    return PatternSpec.from_strings(P2_POLYS, "P2")


@pytest.fixture
def cubic():
    return PatternSpec.from_strings(CUBIC_POLYS, "cubic")


# acceptance summary: one PASS/FAIL line per criterion ---------------------------

_CRITERION = re.compile(r"test_criterion_(\d+)")
_acceptance: dict[int, tuple[str, float, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = _CRITERION.search(item.name)
    if not m or "test_acceptance" not in item.nodeid:
        return
    n = int(m.group(1))
    if report.when == "call":
        detail = getattr(item, "acceptance_detail", "")
        if report.failed:
            msg = str(call.excinfo.value).strip().splitlines()[0] if call.excinfo else ""
            detail = f"{detail} {msg}".strip()
        _acceptance[n] = ("PASS" if report.passed else "FAIL", report.duration, detail)
    elif report.failed and n not in _acceptance:
        _acceptance[n] = ("FAIL", report.duration, f"{report.when} error")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        status, dur, detail = _acceptance[n]
        terminalreporter.write_line(f"criterion {n}: {status} ({dur:.2f} s) {detail}")
