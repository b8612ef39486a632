"""Shared pytest configuration.

Tests marked ``@pytest.mark.criterion(number, title)`` form the acceptance
suite; their outcomes, plus any ``record_property("detail", ...)`` text,
are printed one line per criterion at the end of the run.
"""
import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    num, title = mark.args
    entry = _RESULTS.setdefault(num, {"title": title, "passed": True, "details": []})
    if rep.failed or rep.skipped:
        entry["passed"] = False
    if rep.when == "call":
        entry["details"] += [str(v) for k, v in item.user_properties if k == "detail"]


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_RESULTS):
        e = _RESULTS[num]
        verdict = "PASS" if e["passed"] else "FAIL"
        detail = "; ".join(e["details"])
        tr.write_line(f"criterion {num:2d} {verdict}  {e['title']}" + (f"  [{detail}]" if detail else ""))
