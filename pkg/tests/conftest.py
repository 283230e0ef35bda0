import os
import re
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_CRIT = re.compile(r"test_criterion_(\d+)")
_results = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_runtest_logreport(report):
    m = _CRIT.search(report.nodeid)
    if not m:
        return
    key = int(m.group(1))
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        prev = _results.get(key, {})
        ok = report.outcome == "passed" and prev.get(name, True)
        prev[name] = ok
        _results[key] = prev


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_results):
        res = _results[key]
        npass = sum(res.values())
        ok = npass == len(res)
        tr.write_line(f"criterion {key:2d}: {'PASS' if ok else 'FAIL'}  ({npass}/{len(res)} checks)")
        for name, good in sorted(res.items()):
            if not good:
                tr.write_line(f"    failed: {name}")
