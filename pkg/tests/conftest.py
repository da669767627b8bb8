import itertools
from collections import deque

import numpy as np
import pytest

from infbound.errors import InfboundError
from infbound.generators import GenSpec, generate
from infbound.graph import from_undirected

P_GRID = [round(0.1 * i, 1) for i in range(1, 10)]

# node names -> ids for the two hand-checked networks
A, B, C, D, E = range(5)


def diamond_net(p):
    """5 nodes a..e, seed b, undirected edges b-a, b-c, a-d, c-d, d-e."""
    return from_undirected(5, [(B, A), (B, C), (A, D), (C, D), (D, E)], p, [B])


def kite_net(p):
    """4 nodes a..d, seed a, undirected edges a-b, a-c, b-c, c-d."""
    return from_undirected(4, [(A, B), (A, C), (B, C), (C, D)], p, [A])


def brute_force_influence(model):
    """Per-node infection probabilities by summing all 2^|E| edge states."""
    edges = model.edges
    probs = model.prob.tolist()
    p = np.zeros(model.n)
    for state in itertools.product((False, True), repeat=len(edges)):
        w = 1.0
        for s, q in zip(state, probs):
            w *= q if s else 1.0 - q
        if w == 0.0:
            continue
        reached = set(model.seeds)
        queue = deque(model.seeds)
        while queue:
            u = queue.popleft()
            for (a, b), s in zip(edges, state):
                if s and a == u and b not in reached:
                    reached.add(b)
                    queue.append(b)
        for v in reached:
            p[v] += w
    return p


def random_small_models(count, seed, max_n=12, max_edges=25, families=("er", "regular", "sf", "tree")):
    """Deterministic stream of small generated models with a grid probability each."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        fam = families[len(out) % len(families)]
        n = int(rng.integers(2, max_n + 1))
        param = {"er": 3.0 / n, "regular": int(rng.integers(1, 4)), "sf": 2.5, "tree": 3.0}[fam]
        p = float(rng.choice(P_GRID))
        spec = GenSpec(fam, n, param, int(rng.integers(2**31)), True, p)
        try:
            model = generate(spec)
        except InfboundError:
            continue
        if model.n_edges > max_edges:
            continue
        out.append(model)
    return out


@pytest.fixture
def diamond():
    return diamond_net


@pytest.fixture
def kite():
    return kite_net


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    def record(number, name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
