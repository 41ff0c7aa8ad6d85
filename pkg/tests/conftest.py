import re
import time

import numpy as np
import pytest

from milnorian.realize import Leaf, realize_group


@pytest.fixture(scope="session")
def real5():
    return realize_group(("B", 2, (1, 0)))


@pytest.fixture(scope="session")
def real14():
    return realize_group(("B", 2, (2, 0)))


def cartan_leaf(real, x, translation):
    """exp(X) for X in ambient coordinates, followed by a translation, as a recipe."""
    coroots = np.array([[float(c) for c in a] for a in real.rs.simple_coroots]).T
    coeffs = np.linalg.lstsq(coroots, np.asarray(x, dtype=float), rcond=None)[0]
    r = real.rs.rank
    params = np.zeros((1, 3 * r))
    params[0, 2 * r:] = coeffs
    return Leaf(real, params, translation)


def _timed_simulation(rep_id, seed, **kw):
    from milnorian.pipeline import simulate
    t0 = time.perf_counter()
    sim = simulate(rep_id, seed, **kw)
    sim.wall_time = time.perf_counter() - t0
    return sim


@pytest.fixture(scope="session")
def sim5():
    return _timed_simulation(("B", 2, (1, 0)), 42)


@pytest.fixture(scope="session")
def sim7():
    return _timed_simulation(("B", 2, (1, 0)), 7)


@pytest.fixture(scope="session")
def sim14():
    return _timed_simulation(("B", 2, (2, 0)), 7)


# --------------------------------------------------------------------------- acceptance summary

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    entry = _ACCEPTANCE.setdefault(n, {"passed": True, "detail": ""})
    if report.failed:
        entry["passed"] = False
    for key, value in report.user_properties:
        if key == "detail":
            entry["detail"] = value


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[n]
        status = "PASS" if e["passed"] else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {e['detail']}")
