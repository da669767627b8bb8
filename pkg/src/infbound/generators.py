"""Random network families used in the experiments.

All families are drawn as undirected simple graphs, optionally cut down to
the largest connected component, given one uniformly random seed node, and
symmetrised with the same transmission probability on every edge.

* ``er(n, p)``         Erdos-Renyi G(n, p)
* ``regular(n, d)``    random d-regular graph (pairing model with rejection)
* ``sf(n, alpha)``     erased configuration model, iid degrees P(k) ~ k^-alpha, k >= 1
* ``tree(n, alpha)``   uniformly random labelled tree with a power-law degree sequence
"""
from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import GenerationFailure, InvalidParamsError
from .graph import ICModel, from_undirected

FAMILIES = ("er", "regular", "sf", "tree")
TREE_TRIES = 1000


@dataclass(frozen=True)
class GenSpec:
    family: str
    n: int
    param: float  # p for er, d for regular, alpha for sf/tree
    rng_seed: int = 0
    take_lcc: bool = False
    uniform_p: float = 0.1

    def validate(self):
        if self.family not in FAMILIES:
            raise InvalidParamsError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.n < 1:
            raise InvalidParamsError("n must be >= 1")
        if not 0.0 <= self.uniform_p <= 1.0:
            raise InvalidParamsError("transmission probability must be in [0, 1]")
        if self.family == "er" and not 0.0 <= self.param <= 1.0:
            raise InvalidParamsError("ER edge probability must be in [0, 1]")
        if self.family == "regular":
            d = int(self.param)
            if d != self.param or d < 1 or d >= self.n or (self.n * d) % 2:
                raise InvalidParamsError(f"no simple {self.param}-regular graph on {self.n} nodes")
        if self.family in ("sf", "tree") and not self.param > 1.0:
            raise InvalidParamsError("power-law exponent must be > 1")


def largest_connected_component(n: int, edges) -> list[int]:
    """Nodes of the largest component, sorted; ties go to the component with the smallest node."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    adj = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
    _, labels = connected_components(adj, directed=False)
    sizes = np.bincount(labels)
    first = np.full(len(sizes), n)
    np.minimum.at(first, labels, np.arange(n))
    best = min(range(len(sizes)), key=lambda c: (-sizes[c], first[c]))
    return np.nonzero(labels == best)[0].tolist()


def _powerlaw_degrees(rng, n, alpha, size):
    ks = np.arange(1, max(n, 2), dtype=float)
    w = ks ** -alpha
    return rng.choice(ks.astype(np.int64), size=size, p=w / w.sum())


def _scale_free_edges(rng, n, alpha):
    deg = _powerlaw_degrees(rng, n, alpha, n)
    if deg.sum() % 2:
        candidates = np.nonzero(deg < n - 1)[0]
        deg[rng.choice(candidates)] += 1
    stubs = rng.permutation(np.repeat(np.arange(n), deg))
    pairs = stubs.reshape(-1, 2)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    pairs = np.sort(pairs, axis=1)
    return np.unique(pairs, axis=0)


def tree_degree_sequence(rng, n, alpha):
    """Power-law degrees (rounded Pareto, density ~ x^-alpha) summing to 2(n-1).

    Entries are redrawn one at a time, keeping only redraws that do not move
    the sum away from the target; after ``TREE_TRIES`` failed attempts the
    generator gives up.
    """
    if n == 1:
        return np.zeros(1, dtype=np.int64)
    target = 2 * (n - 1)

    def draw(size):
        x = (1.0 - rng.random(size)) ** (-1.0 / (alpha - 1.0))
        return np.clip(np.rint(x), 1, n - 1).astype(np.int64)

    for _ in range(TREE_TRIES):
        deg = draw(n)
        total = int(deg.sum())
        for _ in range(20 * n):
            if total == target:
                return deg
            i = int(rng.integers(n))
            new = int(draw(1)[0])
            cand = total - deg[i] + new
            if abs(cand - target) <= abs(total - target):
                deg[i] = new
                total = cand
        if total == target:
            return deg
    raise GenerationFailure(f"no tree degree sequence for n={n}, alpha={alpha} after {TREE_TRIES} tries")


def _tree_edges(rng, n, alpha):
    if n == 1:
        return np.zeros((0, 2), dtype=np.int64)
    deg = tree_degree_sequence(rng, n, alpha)
    prufer = rng.permutation(np.repeat(np.arange(n), deg - 1)).tolist()
    tree = nx.from_prufer_sequence(prufer) if n > 2 else nx.path_graph(2)
    return np.array(sorted(tuple(sorted(e)) for e in tree.edges()), dtype=np.int64)


def _nx_seed(rng):
    return int(rng.integers(2**32))


def draw_graph(spec: GenSpec):
    """The raw undirected edge array ``(m, 2)`` with ``u < v``, before any LCC cut."""
    spec.validate()
    rng = np.random.default_rng(spec.rng_seed)
    n = spec.n
    if spec.family == "er":
        g = nx.fast_gnp_random_graph(n, spec.param, seed=_nx_seed(rng))
        edges = np.array(sorted(tuple(sorted(e)) for e in g.edges()), dtype=np.int64)
    elif spec.family == "regular":
        g = nx.random_regular_graph(int(spec.param), n, seed=_nx_seed(rng))
        edges = np.array(sorted(tuple(sorted(e)) for e in g.edges()), dtype=np.int64)
    elif spec.family == "sf":
        edges = _scale_free_edges(rng, n, spec.param)
    else:
        edges = _tree_edges(rng, n, spec.param)
    return edges.reshape(-1, 2), rng


def generate(spec: GenSpec) -> ICModel:
    """Draw a network per ``spec`` and wrap it as a symmetrised IC model."""
    edges, rng = draw_graph(spec)
    n = spec.n
    if spec.take_lcc:
        keep = largest_connected_component(n, edges)
        remap = np.full(n, -1, dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        mask = (remap[edges[:, 0]] >= 0) & (remap[edges[:, 1]] >= 0)
        edges = remap[edges[mask]]
        n = len(keep)
    seed = int(rng.integers(n))
    return from_undirected(n, edges.tolist(), spec.uniform_p, [seed])
