"""Reference values: exact enumeration, Monte Carlo, and path-union probabilities.

Everything here is exponential or stochastic and exists to check (or seed)
the message-passing bounds. Exact routines refuse to run past an edge cap,
25 by default, overridable through ``INFBOUND_ORACLE_CAP``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidBoundsError, TooManyEdgesError
from .graph import ICModel, induced_subnetwork

DEFAULT_CAP = 25
MC_CHUNK = 4096  # samples per RNG substream; fixed so results never depend on batching


def oracle_cap(cap=None) -> int:
    if cap is not None:
        return int(cap)
    return int(os.environ.get("INFBOUND_ORACLE_CAP", DEFAULT_CAP))


@dataclass(frozen=True)
class InfectionProbabilities:
    p: np.ndarray
    sigma: float


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    rng_seed: int
    node_p: np.ndarray | None = None
    variance: float = 0.0


# --- exact reachability -----------------------------------------------------


def exact_influence(model: ICModel, cap=None) -> InfectionProbabilities:
    """Exact infection probabilities by summing over live-arc edge states.

    States are explored by branching only on edges that leave the current
    reached set, so edges whose state cannot change the outcome are
    marginalised away instead of enumerated; identical partial states are
    merged. The result equals the plain 2^|E| sum.
    """
    cap = oracle_cap(cap)
    if model.n_edges > cap:
        raise TooManyEdgesError(model.n_edges, cap, "exact_influence")

    n = model.n
    seed_mask = 0
    for s in model.seeds:
        seed_mask |= 1 << s
    # edges into seeds and closed-for-sure edges never matter
    edges = [
        (u, v, p)
        for (u, v), p in zip(model.edges, model.prob.tolist())
        if not (seed_mask >> v) & 1 and p > 0.0
    ]
    into = [0] * n
    for e, (_, v, _) in enumerate(edges):
        into[v] |= 1 << e

    memo = {}

    def indicator(reached):
        out = np.zeros(n)
        for v in range(n):
            if (reached >> v) & 1:
                out[v] = 1.0
        return out

    def solve(reached, closed):
        key = (reached, closed)
        hit = memo.get(key)
        if hit is not None:
            return hit
        for e, (u, v, p) in enumerate(edges):
            if (reached >> u) & 1 and not (reached >> v) & 1 and not (closed >> e) & 1:
                break
        else:
            res = indicator(reached)
            memo[key] = res
            return res
        grown = reached | (1 << v)
        # closed edges into a now-reached node are irrelevant; drop them from the key
        grown_closed = closed & ~into[v]
        if p >= 1.0:
            res = solve(grown, grown_closed)
        else:
            res = p * solve(grown, grown_closed) + (1.0 - p) * solve(reached, closed | (1 << e))
        memo[key] = res
        return res

    p = solve(seed_mask, 0)
    return InfectionProbabilities(p, float(p.sum()))


def exact_subnetwork_influence(model: ICModel, vertex_subset, cap=None) -> InfectionProbabilities:
    """Exact probabilities inside the induced subnetwork; zero outside the subset."""
    sub, nodes = induced_subnetwork(model, vertex_subset)
    res = exact_influence(sub, cap=cap)
    p = np.zeros(model.n)
    p[nodes] = res.p
    return InfectionProbabilities(p, float(p.sum()))


# --- Monte Carlo ------------------------------------------------------------


def _chunk_rng(rng_seed, chunk):
    ss = np.random.SeedSequence(entropy=int(rng_seed) % 2**64, spawn_key=(chunk,))
    return np.random.Generator(np.random.PCG64(ss))


def _simulate_chunk(model, order, starts, dst_nodes, rng, n_samples):
    """Infected indicator matrix (n, n_samples) for one substream.

    Samples are packed 64 per word so a live-arc draw for every sample is
    propagated with word-wide OR/AND until the infected sets stop growing.
    """
    words = -(-n_samples // 64)
    width = words * 64
    draws = rng.random((model.n_edges, n_samples)) < model.prob[:, None]
    if width != n_samples:
        draws = np.concatenate([draws, np.zeros((model.n_edges, width - n_samples), bool)], axis=1)
    open_bits = np.packbits(draws, axis=1, bitorder="little").view(np.uint64)

    inf = np.zeros((model.n, words), dtype=np.uint64)
    inf[list(model.seeds)] = np.uint64(0xFFFFFFFFFFFFFFFF)
    if len(order):
        src = model.src[order]
        open_bits = open_bits[order]
        while True:
            contrib = inf[src] & open_bits
            red = np.bitwise_or.reduceat(contrib, starts, axis=0)
            grown = inf[dst_nodes] | red
            if np.array_equal(grown, inf[dst_nodes]):
                break
            inf[dst_nodes] = grown
    bits = np.unpackbits(inf.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :n_samples]


def mc_influence(model: ICModel, samples: int, rng_seed: int = 0, node_probs: bool = False) -> McEstimate:
    """Monte Carlo estimate of the influence.

    Each sample is one live-arc draw (every edge open independently with its
    probability), which has the same infected-set law as the sequential
    cascade. Samples are split into fixed chunks of ``MC_CHUNK``; chunk ``c``
    draws from PCG64 seeded with ``SeedSequence(rng_seed, spawn_key=(c,))``.
    """
    samples = int(samples)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    keep = ~model.is_seed[model.dst]
    idx = np.nonzero(keep)[0]
    order = idx[np.argsort(model.dst[idx], kind="stable")]
    dsts = model.dst[order]
    if len(order):
        starts = np.concatenate([[0], np.nonzero(np.diff(dsts))[0] + 1])
        dst_nodes = dsts[starts]
    else:
        starts = dst_nodes = np.zeros(0, dtype=np.int64)

    sizes = np.empty(samples, dtype=np.int64)
    counts = np.zeros(model.n, dtype=np.int64)
    done, chunk = 0, 0
    while done < samples:
        m = min(MC_CHUNK, samples - done)
        bits = _simulate_chunk(model, order, starts, dst_nodes, _chunk_rng(rng_seed, chunk), m)
        sizes[done : done + m] = bits.sum(axis=0, dtype=np.int64)
        if node_probs:
            counts += bits.sum(axis=1, dtype=np.int64)
        done += m
        chunk += 1

    mean = float(sizes.mean())
    var = float(sizes.var(ddof=1)) if samples > 1 else 0.0
    stderr = math.sqrt(var / samples)
    return McEstimate(
        mean=mean,
        stderr=stderr,
        samples=samples,
        rng_seed=int(rng_seed),
        node_p=counts / samples if node_probs else None,
        variance=var,
    )


# --- unions of open paths -----------------------------------------------------


def enumerate_paths(model: ICModel, max_len: int, excluded=()):
    """All qualifying paths of length <= ``max_len``.

    A qualifying path starts at a seed, is simple, contains no other seed and
    avoids ``excluded``. Yields ``(length, end, node_mask, edge_mask)``; the
    trivial length-0 path of each seed has ``edge_mask == 0``.
    """
    excluded = set(excluded)
    is_seed = model.is_seed
    out = []
    stack = []
    for s in model.seeds:
        if s in excluded:
            continue
        stack.append((s, 0, 1 << s, 0))
    while stack:
        u, length, nodes, emask = stack.pop()
        out.append((length, u, nodes, emask))
        if length == max_len:
            continue
        for e in model.out_adj[u]:
            v = int(model.dst[e])
            if is_seed[v] or v in excluded or (nodes >> v) & 1:
                continue
            stack.append((v, length + 1, nodes | (1 << v), emask | (1 << e)))
    return out


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def union_probability(masks, prob) -> float:
    """P(at least one edge set in ``masks`` is fully open); edges independent.

    Exact factoring on the most shared edge, with absorption and a shortcut
    for pairwise-disjoint sets.
    """
    prob = [float(x) for x in prob]

    def mask_prob(m):
        r = 1.0
        for b in _bits(m):
            r *= prob[b]
        return r

    @lru_cache(maxsize=None)
    def solve(masks):
        if 0 in masks:
            return 1.0
        if not masks:
            return 0.0
        ms = sorted(masks, key=lambda m: (bin(m).count("1"), m))
        kept = []
        for m in ms:
            if not any(k & m == k for k in kept):
                kept.append(m)
        if len(kept) == 1:
            return mask_prob(kept[0])
        union, overlap = 0, 0
        for m in kept:
            overlap |= union & m
            union |= m
        if not overlap:
            q = 1.0
            for m in kept:
                q *= 1.0 - mask_prob(m)
            return 1.0 - q
        counts = {}
        for m in kept:
            for b in _bits(m & overlap):
                counts[b] = counts.get(b, 0) + 1
        b = max(sorted(counts), key=counts.get)
        bit = 1 << b
        p = prob[b]
        opened = frozenset(m & ~bit for m in kept)
        closed = frozenset(m for m in kept if not m & bit)
        return p * solve(opened) + (1.0 - p) * solve(closed)

    return solve(frozenset(masks))


def _check_cap(masks, cap, what):
    union = 0
    for m in masks:
        union |= m
    k = bin(union).count("1")
    if k > cap:
        raise TooManyEdgesError(k, cap, what)


def path_union_prob(model: ICModel, target: int, max_len: int, excluded=(), with_final_edge=None, cap=None) -> float:
    """Probability that ``target`` is reached by an open qualifying path.

    Without ``with_final_edge``: paths of length <= ``max_len`` (see
    :func:`enumerate_paths`). With ``with_final_edge=v``: paths of length
    exactly ``max_len`` to ``target`` that avoid ``v``, times the probability
    that edge ``(target, v)`` is open.
    """
    cap = oracle_cap(cap)
    if with_final_edge is None:
        paths = enumerate_paths(model, max_len, excluded)
        masks = [m for length, end, _, m in paths if end == target]
        _check_cap(masks, cap, f"path union at node {target}")
        return union_probability(masks, model.prob)
    v = int(with_final_edge)
    pe = model.p(target, v)
    excl = set(excluded) | {v}
    paths = enumerate_paths(model, max_len, excl)
    masks = [m for length, end, _, m in paths if end == target and length == max_len]
    _check_cap(masks, cap, f"path union at edge ({target}, {v})")
    if pe == 0.0:
        return 0.0
    return pe * union_probability(masks, model.prob)


def variance_upper_bound(sigma_plus: float, sigma_minus: float, tol: float = 1e-9) -> float:
    """``(sigma_plus - sigma_minus)**2 / 4``."""
    if sigma_plus < sigma_minus - tol:
        raise InvalidBoundsError(f"sigma_plus {sigma_plus} < sigma_minus {sigma_minus}")
    d = max(sigma_plus - sigma_minus, 0.0)
    return d * d / 4.0
