"""Independent cascade problem instances and their edge-list file format.

An :class:`ICModel` is a directed graph on dense node ids ``0..n-1`` with one
transmission probability per directed edge and a nonempty seed set. Models are
immutable once built; every builder validates its input and raises a
:class:`~infbound.errors.ModelError` subclass on bad data.

File format (one record per line, ``#`` starts a comment)::

    directed 4            # or: undirected 4
    seeds 0
    0 1 0.5
    1 2 0.25
"""
from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateEdgeError,
    EmptySeedSetError,
    IndexOutOfRangeError,
    ParseError,
    ProbOutOfRangeError,
    SelfLoopError,
)

__all__ = [
    "ICModel",
    "build_ic_model",
    "from_undirected",
    "induced_subnetwork",
    "load_edge_list",
    "save_edge_list",
    "dumps_edge_list",
    "loads_edge_list",
]


def _frozen(a, dtype):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ICModel:
    """A validated IC model ``IC(G, P, S0)``.

    Edges are kept in construction order; ``src[e] -> dst[e]`` carries
    probability ``prob[e]``. ``out_adj[u]`` and ``in_adj[v]`` list edge ids.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    prob: np.ndarray
    seeds: tuple
    labels: tuple | None = None
    out_adj: tuple = field(init=False, repr=False)
    in_adj: tuple = field(init=False, repr=False)
    edge_id: dict = field(init=False, repr=False)
    is_seed: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        out_adj = [[] for _ in range(self.n)]
        in_adj = [[] for _ in range(self.n)]
        edge_id = {}
        for e, (u, v) in enumerate(zip(self.src.tolist(), self.dst.tolist())):
            out_adj[u].append(e)
            in_adj[v].append(e)
            edge_id[(u, v)] = e
        is_seed = np.zeros(self.n, dtype=bool)
        is_seed[list(self.seeds)] = True
        is_seed.setflags(write=False)
        object.__setattr__(self, "out_adj", tuple(tuple(a) for a in out_adj))
        object.__setattr__(self, "in_adj", tuple(tuple(a) for a in in_adj))
        object.__setattr__(self, "edge_id", edge_id)
        object.__setattr__(self, "is_seed", is_seed)

    @property
    def n_edges(self) -> int:
        return len(self.src)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist()))

    def out_neighbors(self, u: int) -> list[int]:
        return [int(self.dst[e]) for e in self.out_adj[u]]

    def in_neighbors(self, v: int) -> list[int]:
        return [int(self.src[e]) for e in self.in_adj[v]]

    def p(self, u: int, v: int) -> float:
        """Transmission probability of edge ``(u, v)``; 0 when absent."""
        e = self.edge_id.get((u, v))
        return 0.0 if e is None else float(self.prob[e])

    def with_prob(self, prob) -> "ICModel":
        """Same graph and seeds, new probabilities (scalar or per-edge)."""
        prob = np.broadcast_to(np.asarray(prob, dtype=float), (self.n_edges,))
        return build_ic_model(self.n, self.edges, prob, self.seeds, labels=self.labels)

    def with_seeds(self, seeds) -> "ICModel":
        return build_ic_model(self.n, self.edges, self.prob, seeds, labels=self.labels)

    def fingerprint(self) -> str:
        """SHA-256 of the canonical serialized form."""
        return hashlib.sha256(dumps_edge_list(self).encode()).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, ICModel):
            return NotImplemented
        if self.n != other.n or set(self.seeds) != set(other.seeds):
            return False
        mine = dict(zip(self.edges, self.prob.tolist()))
        theirs = dict(zip(other.edges, other.prob.tolist()))
        return mine == theirs

    __hash__ = None


def build_ic_model(n, edges, probs, seeds, labels=None) -> ICModel:
    """Validate and build a model from directed ``edges`` and per-edge ``probs``."""
    n = int(n)
    if n < 1:
        raise IndexOutOfRangeError(f"node count must be >= 1, got {n}")
    edges = [(int(u), int(v)) for u, v in edges]
    probs = [float(x) for x in np.asarray(probs, dtype=float).ravel()] if len(edges) else []
    if len(probs) != len(edges):
        raise ValueError(f"{len(edges)} edges but {len(probs)} probabilities")
    seen = set()
    for (u, v), p in zip(edges, probs):
        if not (0 <= u < n and 0 <= v < n):
            raise IndexOutOfRangeError(f"edge ({u}, {v}) outside [0, {n})")
        if u == v:
            raise SelfLoopError(f"self-loop at node {u}")
        if (u, v) in seen:
            raise DuplicateEdgeError(f"duplicate edge ({u}, {v})")
        if not (0.0 <= p <= 1.0) or math.isnan(p):
            raise ProbOutOfRangeError(f"probability {p!r} on edge ({u}, {v}) not in [0, 1]")
        seen.add((u, v))
    seeds = sorted({int(s) for s in seeds})
    if not seeds:
        raise EmptySeedSetError("seed set is empty")
    for s in seeds:
        if not 0 <= s < n:
            raise IndexOutOfRangeError(f"seed {s} outside [0, {n})")
    if labels is not None:
        labels = tuple(str(x) for x in labels)
        if len(labels) != n:
            raise ValueError(f"{len(labels)} labels for {n} nodes")
    src = _frozen([u for u, _ in edges], np.int64)
    dst = _frozen([v for _, v in edges], np.int64)
    return ICModel(n, src, dst, _frozen(probs, np.float64), tuple(seeds), labels)


def from_undirected(n, edges, probs, seeds, labels=None) -> ICModel:
    """Each undirected ``{u, v}`` with probability p becomes ``(u, v)`` and ``(v, u)``."""
    edges = [(int(u), int(v)) for u, v in edges]
    probs = np.broadcast_to(np.asarray(probs, dtype=float), (len(edges),))
    directed, dprobs = [], []
    for (u, v), p in zip(edges, probs):
        directed += [(u, v), (v, u)]
        dprobs += [p, p]
    return build_ic_model(n, directed, dprobs, seeds, labels=labels)


def induced_subnetwork(model: ICModel, subset: Iterable[int]):
    """Vertex-induced subnetwork on ``subset``.

    Returns ``(sub_model, nodes)`` where ``nodes[i]`` is the original id of
    sub-node ``i``. Raises EmptySeedSetError if no seed lies in the subset.
    """
    nodes = sorted({int(v) for v in subset})
    local = {v: i for i, v in enumerate(nodes)}
    edges, probs = [], []
    for e, (u, v) in enumerate(model.edges):
        if u in local and v in local:
            edges.append((local[u], local[v]))
            probs.append(model.prob[e])
    seeds = [local[s] for s in model.seeds if s in local]
    if not seeds:
        raise EmptySeedSetError("no seed inside the vertex subset")
    return build_ic_model(len(nodes), edges, probs, seeds), nodes


# --- edge-list text format -------------------------------------------------


def dumps_edge_list(model: ICModel) -> str:
    lines = [f"directed {model.n}", "seeds " + " ".join(str(s) for s in model.seeds)]
    for (u, v), p in zip(model.edges, model.prob.tolist()):
        lines.append(f"{u} {v} {p:.17g}")
    return "\n".join(lines) + "\n"


def _strip(line):
    return line.split("#", 1)[0].strip()


def _is_int(tok):
    try:
        int(tok)
    except ValueError:
        return False
    return True


def loads_edge_list(text: str, labels: Sequence[str] | None = None) -> ICModel:
    """Parse the edge-list format.

    If any node token is not an integer, all tokens are treated as external
    labels and mapped to dense ids in order of first appearance; the mapping
    ends up in ``model.labels``. ``labels`` attaches a sidecar table to a file
    written with integer ids.
    """
    records = [(i, _strip(l)) for i, l in enumerate(text.splitlines(), 1)]
    records = [(i, l) for i, l in records if l]
    if not records:
        raise ParseError("empty file", line=1)

    line_no, header = records[0]
    parts = header.split()
    if len(parts) != 2 or parts[0] not in ("directed", "undirected"):
        raise ParseError(f"expected 'directed <n>' or 'undirected <n>', got {header!r}", line_no)
    try:
        n = int(parts[1])
    except ValueError:
        raise ParseError(f"bad node count {parts[1]!r}", line_no) from None
    if n < 1:
        raise ParseError(f"node count must be >= 1, got {n}", line_no)
    directed = parts[0] == "directed"

    if len(records) < 2 or records[1][1].split()[0] != "seeds":
        ln = records[1][0] if len(records) > 1 else line_no
        raise ParseError("second record must be 'seeds <id> ...'", ln)

    rows = []
    for ln, rec in records[2:]:
        toks = rec.split()
        if len(toks) != 3:
            raise ParseError(f"expected '<src> <dst> <prob>', got {rec!r}", ln)
        rows.append((ln, toks))
    seed_line, seed_rec = records[1]
    seed_toks = seed_rec.split()[1:]
    if not seed_toks:
        raise EmptySeedSetError("seed set is empty", seed_line)

    all_toks = seed_toks + [t for _, toks in rows for t in toks[:2]]
    label_map = None if all(_is_int(t) for t in all_toks) else {}

    def node(tok, ln):
        if label_map is None:
            v = int(tok)
            if not 0 <= v < n:
                raise IndexOutOfRangeError(f"node {v} outside [0, {n})", ln)
            return v
        if tok not in label_map:
            if len(label_map) >= n:
                raise IndexOutOfRangeError(f"more than {n} distinct labels", ln)
            label_map[tok] = len(label_map)
        return label_map[tok]

    seeds = [node(tok, seed_line) for tok in seed_toks]
    edges, probs, seen = [], [], set()
    for ln, (a, b, ptok) in rows:
        u, v = node(a, ln), node(b, ln)
        try:
            p = float(ptok)
        except ValueError:
            raise ParseError(f"bad probability {ptok!r}", ln) from None
        if not 0.0 <= p <= 1.0:
            raise ProbOutOfRangeError(f"probability {ptok} not in [0, 1]", ln)
        if u == v:
            raise SelfLoopError(f"self-loop at node {a}", ln)
        for key in [(u, v)] if directed else [(u, v), (v, u)]:
            if key in seen:
                raise DuplicateEdgeError(f"duplicate edge ({a}, {b})", ln)
            seen.add(key)
        edges.append((u, v))
        probs.append(p)

    if label_map is not None:
        for i in range(len(label_map), n):
            label_map[f"_{i}"] = i  # isolated nodes never named in the file
        labels = sorted(label_map, key=label_map.get)
    build = build_ic_model if directed else from_undirected
    return build(n, edges, probs, seeds, labels=labels)


def _sidecar(path) -> str:
    return os.fspath(path) + ".labels"


def load_edge_list(path) -> ICModel:
    """Read a model file; a ``<path>.labels`` sidecar, if present, supplies labels."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    labels = None
    if os.path.exists(_sidecar(path)):
        with open(_sidecar(path), encoding="utf-8") as fh:
            labels = [l.rstrip("\n") for l in fh if l.strip()]
    return loads_edge_list(text, labels=labels)


def save_edge_list(model: ICModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_edge_list(model))
    if model.labels is not None:
        with open(_sidecar(path), "w", encoding="utf-8") as fh:
            fh.write("\n".join(model.labels) + "\n")
