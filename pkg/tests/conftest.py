import numpy as np
import pytest

from harris.core import Kernel, LyapunovWeight
from harris.examples import averaged_flip_chain, discretized_ar1, flip_chain, reflected_random_walk

_ACCEPTANCE_LINES = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, "rep_" + rep.when, rep)


@pytest.fixture
def criterion(request):
    """Records one PASS/FAIL line per acceptance criterion."""
    info = {"label": request.node.name, "detail": ""}
    yield info
    rep = getattr(request.node, "rep_call", None)
    status = "PASS" if rep is not None and rep.passed else "FAIL"
    line = f"[{status}] {info['label']}"
    if info["detail"]:
        line += f"  ({info['detail']})"
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def flip():
    return flip_chain()


@pytest.fixture
def avg_flip():
    return averaged_flip_chain(6)


@pytest.fixture(scope="session")
def ar1():
    return discretized_ar1(0.5, 1.0, -6.0, 6.0, 61)


@pytest.fixture
def walk():
    return reflected_random_walk(5, 0.1)


def random_chain(rng, n, kind=None):
    """Random kernel + weight pairs of a few shapes used across the suite."""
    kind = kind if kind is not None else rng.integers(3)
    if kind == 0:
        # dense rows, arbitrary weights
        P = rng.dirichlet(np.full(n, 0.5), size=n)
        V = rng.uniform(0, 10, n)
    elif kind == 1:
        # banded downward drift with a regeneration atom at 0
        P = np.zeros((n, n))
        for x in range(n):
            lo, hi = max(0, x - 3), min(n - 1, x + 1)
            w = rng.dirichlet(np.ones(hi - lo + 1)) * (1 + np.arange(hi - lo + 1)[::-1])
            P[x, lo:hi + 1] = w / w.sum() * 0.9
            P[x, 0] += 0.1
        V = np.arange(n, dtype=float) * rng.uniform(0.5, 2)
    else:
        # sparse rows sharing a common hub state
        P = rng.dirichlet(np.full(n, 0.1), size=n) * 0.7
        P[:, rng.integers(n)] += 0.3
        V = rng.exponential(3.0, n)
    return Kernel(P / P.sum(axis=1, keepdims=True)), LyapunovWeight(V)
