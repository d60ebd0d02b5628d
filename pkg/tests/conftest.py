import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mlcut.graph import WeightedGraph, random_weighted_graph

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def naive_cut(g, x):
    total = 0.0
    for a, b, w in g.edges():
        if x[a] != x[b]:
            total += w
    return total


def random_graph(rng, n, p=0.4, signed=False):
    iu, iv = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    w = rng.uniform(0.1, 5.0, keep.sum())
    if signed:
        w *= rng.choice([-1.0, 1.0], w.size)
    return WeightedGraph(n, iu[keep], iv[keep], w)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def triangle():
    return WeightedGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def p3():
    return WeightedGraph.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def medium_graph():
    return random_weighted_graph(120, 0.06, 3.0, seed=4)


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE_LINES, [])

    def record(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else "")
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
