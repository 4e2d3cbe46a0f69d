import random

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("suite", max_examples=40, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")

_CRITERIA = {}  # number -> {"title", "outcomes", "observed"}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    num, title = mark.args
    entry = _CRITERIA.setdefault(num, {"title": title, "outcomes": [], "observed": []})
    entry["outcomes"].append((item.name, rep.passed))
    entry["observed"].extend(f"{k}={v}" for k, v in item.user_properties)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        e = _CRITERIA[num]
        ok = all(p for _, p in e["outcomes"])
        passed = sum(p for _, p in e["outcomes"])
        line = f"criterion {num} ({e['title']}): {'PASS' if ok else 'FAIL'} [{passed}/{len(e['outcomes'])} checks]"
        tr.write_line(line)
        for note in e["observed"]:
            tr.write_line(f"    {note}")


@pytest.fixture
def rng():
    return random.Random(12345)
