"""Nonbacktracking upper bound (NB-UB) on the influence.

Messages ``UB_l(u->v)`` bound the probability that ``v`` is reached through
``u`` by an open path of length ``l+1``; node values ``UB_l(v)`` combine the
incoming messages, and a message never feeds straight back along the edge it
arrived on. The bound is ``sum_v 1 - prod_l (1 - UB_l(v))``.

:func:`nb_ub` runs each level as whole-array operations over the edge list;
:func:`nb_ub_scalar` is the per-node message-passing loop with explicit
frontier and message maps, kept as a cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import ICModel

EPS = 1e-12


def _clamp(x):
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def process_incoming_msg_ub(messages) -> float:
    """``1 - prod(1 - m)`` over the incoming message values."""
    q = 1.0
    for m in messages:
        q *= 1.0 - m
    return _clamp(1.0 - q)


def generate_outgoing_msg_ub(msg_from_target, ub_u, p_uv, others=()) -> float:
    """Message ``UB_l(u->v)`` with ``v``'s own contribution removed.

    ``msg_from_target`` is ``UB_{l-1}(v->u)`` (0 when ``v`` sent nothing).
    When ``1 - msg_from_target <= EPS`` the ratio is replaced by the product
    over ``others``, the remaining incoming messages of ``u``; it is only
    consumed in that case, so a lazy iterable is fine.
    """
    if msg_from_target == 0.0:
        return _clamp(p_uv * ub_u)
    denom = 1.0 - msg_from_target
    if denom <= EPS:
        q = 1.0
        for m in others:
            q *= 1.0 - m
        return _clamp(p_uv * (1.0 - q))
    return _clamp(p_uv * (1.0 - (1.0 - ub_u) / denom))


@dataclass
class UBTable:
    """Per-level node bounds, optionally with per-level edge messages.

    ``levels[i]`` holds ``UB_{start_level + i}(.)``; levels past the stored
    ones are identically zero. ``messages[i][e]`` is ``UB_{start_level+i}``
    on edge ``e`` when ``keep_table`` was set.
    """

    model: ICModel
    sigma_plus: float
    node_bound: np.ndarray
    start_level: int = 0
    levels: list = field(default_factory=list)
    messages: list = field(default_factory=list)
    levels_run: int = 0
    op_count: int = 0

    def ub(self, level: int, v: int) -> float:
        i = level - self.start_level
        if 0 <= i < len(self.levels):
            return float(self.levels[i][v])
        return 0.0

    def msg(self, level: int, u: int, v: int) -> float:
        i = level - self.start_level
        e = self.model.edge_id.get((u, v))
        if e is None or not 0 <= i < len(self.messages):
            return 0.0
        return float(self.messages[i][e])


def sigma_plus(table: UBTable) -> float:
    """Recompute ``sum_v 1 - prod_l (1 - UB_l(v))`` from the stored levels."""
    acc = np.ones(table.model.n)
    for ub in table.levels:
        acc *= 1.0 - ub
    return float(np.sum(1.0 - acc))


class _EdgeIndex:
    """Static per-model arrays for the vectorised recursion."""

    def __init__(self, model: ICModel):
        self.model = model
        src, dst = model.src, model.dst
        self.active = ~model.is_seed[dst]
        rev = np.full(model.n_edges, -1, dtype=np.int64)
        for e, (u, v) in enumerate(model.edges):
            r = model.edge_id.get((v, u))
            if r is not None:
                rev[e] = r
        self.rev = rev
        self.has_rev = rev >= 0
        order = np.argsort(dst, kind="stable")
        d = dst[order]
        self.order = order
        if len(order):
            self.starts = np.concatenate([[0], np.nonzero(np.diff(d))[0] + 1])
            self.dst_nodes = d[self.starts]
        else:
            self.starts = self.dst_nodes = np.zeros(0, dtype=np.int64)
        self.out_deg = np.bincount(src, minlength=model.n)
        self.in_deg = np.bincount(dst, minlength=model.n)

    def node_products(self, msg):
        """prod over incoming edges of (1 - msg), per node."""
        prod = np.ones(self.model.n)
        if len(self.order):
            prod[self.dst_nodes] = np.multiply.reduceat(1.0 - msg[self.order], self.starts)
        return prod


def _propagate(
    model,
    index,
    start_level,
    ub_start,
    msg_start,
    frontier,
    keep_table,
    drop_zero=False,
    backtracking=False,
):
    """Run levels ``start_level+1 .. n-1`` from the given level state."""
    n = model.n
    prob = model.prob
    src = model.src
    active = index.active
    acc = 1.0 - ub_start
    levels = [ub_start.copy()] if keep_table else []
    messages = [msg_start.copy()] if keep_table else []
    msg = msg_start
    ops = 0
    levels_run = 1
    for _ in range(start_level + 1, n):
        if drop_zero:
            frontier = np.zeros(n, bool)
            frontier[model.dst[msg > 0.0]] = True
        if not frontier.any():
            break
        ops += int(frontier.sum() + index.in_deg[frontier].sum() + index.out_deg[frontier].sum())
        levels_run += 1

        prod = index.node_products(msg)
        ub = np.clip(1.0 - prod, 0.0, 1.0)
        ub_src = ub[src]
        if backtracking:
            out = prob * ub_src
        else:
            back = np.where(index.has_rev, msg[index.rev], 0.0)
            denom = 1.0 - back
            plain = back == 0.0
            guarded = ~plain & (denom <= EPS)
            safe = np.where(plain | guarded, 1.0, denom)
            out = np.where(plain, prob * ub_src, prob * (1.0 - prod[src] / safe))
            for e in np.nonzero(guarded & active)[0]:
                u, v = int(src[e]), int(model.dst[e])
                q = 1.0
                for f in model.in_adj[u]:
                    if int(src[f]) != v:
                        q *= 1.0 - msg[f]
                out[e] = prob[e] * (1.0 - q)
        out = np.where(active, np.clip(out, 0.0, 1.0), 0.0)

        acc *= 1.0 - ub
        if keep_table:
            levels.append(ub)
            messages.append(out)
        nxt = np.zeros(n, bool)
        nxt[model.dst[active & frontier[src]]] = True
        frontier = nxt
        msg = out
    sigma = float(np.sum(1.0 - acc))
    return sigma, 1.0 - acc, levels, messages, levels_run, ops


def nb_ub(model: ICModel, keep_table: bool = True, drop_zero: bool = False, backtracking: bool = False) -> UBTable:
    """NB-UB over levels ``0..n-1``.

    ``drop_zero`` prunes nodes whose incoming messages are all zero from the
    frontier (allows earlier termination, same result). ``backtracking``
    replaces the nonbacktracking message with ``P_uv * UB_l(u)``; that
    variant is still an upper bound but a looser one.
    """
    index = _EdgeIndex(model)
    ub0 = model.is_seed.astype(float)
    msg0 = np.where(index.active & model.is_seed[model.src], model.prob, 0.0)
    frontier = np.zeros(model.n, bool)
    frontier[model.dst[index.active & model.is_seed[model.src]]] = True
    sigma, bound, levels, messages, run, ops = _propagate(
        model, index, 0, ub0, msg0, frontier, keep_table, drop_zero, backtracking
    )
    ops += len(model.seeds) + int(index.out_deg[model.is_seed].sum())
    return UBTable(model, sigma, bound, 0, levels, messages, run, ops)


# --- literal message-passing form ------------------------------------------


@dataclass
class MessageFrontier:
    """Frontier ``S_l`` and the two message buffers of one level."""

    nodes: set = field(default_factory=set)
    m_curr: dict = field(default_factory=dict)
    m_next: dict = field(default_factory=dict)


def nb_ub_scalar(model: ICModel) -> UBTable:
    """Per-node NB-UB with explicit message maps (slow; for cross-checking)."""
    n = model.n
    seeds = set(model.seeds)
    fr = MessageFrontier(nodes=set(model.seeds))
    for s in model.seeds:
        fr.m_next[s] = {s: 1.0}
    levels, messages = [], []
    acc = np.ones(n)
    for _ in range(n):
        if not fr.nodes:
            break
        ub_l = np.zeros(n)
        msg_l = np.zeros(model.n_edges)
        nxt = set()
        for u in sorted(fr.nodes):
            fr.m_curr[u] = fr.m_next.pop(u, {})
        for u in sorted(fr.nodes):
            incoming = fr.m_curr[u]
            ub_u = process_incoming_msg_ub(incoming.values())
            ub_l[u] = ub_u
            for e in model.out_adj[u]:
                v = int(model.dst[e])
                if v in seeds:
                    continue
                nxt.add(v)
                back = incoming.get(v, 0.0)
                others = (m for w, m in incoming.items() if w != v)
                out = generate_outgoing_msg_ub(back, ub_u, float(model.prob[e]), others)
                msg_l[e] = out
                fr.m_next.setdefault(v, {})[u] = out
        fr.m_curr = {}
        fr.nodes = nxt
        acc *= 1.0 - ub_l
        levels.append(ub_l)
        messages.append(msg_l)
    sigma = float(np.sum(1.0 - acc))
    return UBTable(model, sigma, 1.0 - acc, 0, levels, messages, len(levels), 0)
