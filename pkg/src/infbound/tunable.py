"""Tunable bounds: exact probabilities up to a horizon ``t``, recursion after.

``t_nb_ub`` seeds the NB-UB recursion at level ``t`` with exact path-union
probabilities; ``t_nb_lb`` replaces the first ``t`` nodes of the NB-LB order
with exact (or Monte Carlo) infection probabilities of the induced
subnetwork on those nodes.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .errors import InvalidHorizonError, InvalidParamsError
from .graph import ICModel, induced_subnetwork
from .nblb import LBVector, _recurse, build_mdas
from .nbub import UBTable, _EdgeIndex, _propagate
from .oracle import (
    _check_cap,
    enumerate_paths,
    exact_subnetwork_influence,
    mc_influence,
    oracle_cap,
    union_probability,
)


@dataclass(frozen=True)
class TunableParams:
    t: int
    mode: str = "exact"  # "exact" or "mc"; mc only for the lower bound
    mc_samples: int = 10_000
    rng_seed: int = 0


def horizon_state(model: ICModel, t: int, cap=None):
    """Exact ``p_{<=t}(u)`` for every node and ``p_t(u->v)`` for every edge.

    Both use qualifying paths from :func:`~infbound.oracle.enumerate_paths`.
    Returns ``(ub_t, msg_t)`` as arrays over nodes and edges.
    """
    cap = oracle_cap(cap)
    paths = enumerate_paths(model, t)
    by_end = defaultdict(list)
    for length, end, nodes, emask in paths:
        by_end[end].append((length, nodes, emask))
    ub = np.zeros(model.n)
    for u, plist in by_end.items():
        masks = [m for _, _, m in plist]
        _check_cap(masks, cap, f"horizon {t}, node {u}")
        ub[u] = union_probability(masks, model.prob)
    msg = np.zeros(model.n_edges)
    for e, (u, v) in enumerate(model.edges):
        if model.is_seed[v] or model.prob[e] == 0.0:
            continue
        masks = [m for length, nodes, m in by_end.get(u, ()) if length == t and not (nodes >> v) & 1]
        if not masks:
            continue
        _check_cap(masks, cap, f"horizon {t}, edge ({u}, {v})")
        msg[e] = model.prob[e] * union_probability(masks, model.prob)
    return ub, msg


def t_nb_ub(model: ICModel, t: int, cap=None, keep_table: bool = True) -> UBTable:
    """Upper bound with exact path unions up to length ``t`` (``0 <= t <= n-1``)."""
    t = int(t)
    if not 0 <= t <= model.n - 1:
        raise InvalidHorizonError(f"upper-bound horizon must be in [0, {model.n - 1}], got {t}")
    ub_t, msg_t = horizon_state(model, t, cap)
    frontier = np.zeros(model.n, bool)
    frontier[model.dst[msg_t > 0.0]] = True
    index = _EdgeIndex(model)
    sigma, bound, levels, messages, run, ops = _propagate(
        model, index, t, ub_t, msg_t, frontier, keep_table
    )
    return UBTable(model, sigma, bound, t, levels, messages, run, ops)


def t_nb_lb(
    model: ICModel,
    t: int,
    mode: str = "exact",
    mc_samples: int = 10_000,
    rng_seed: int = 0,
    cap=None,
    greedy: bool = False,
) -> LBVector:
    """Lower bound with the first ``t`` nodes of the MDAS order solved directly.

    ``mode="mc"`` estimates those nodes by Monte Carlo on the subnetwork; the
    result is then flagged ``probabilistic`` and is not a guaranteed bound.
    """
    t = int(t)
    if not 0 <= t <= model.n:
        raise InvalidHorizonError(f"lower-bound horizon must be in [0, {model.n}], got {t}")
    if mode not in ("exact", "mc"):
        raise InvalidParamsError(f"unknown mode {mode!r}")
    mdas = build_mdas(model)
    prefix = [int(v) for v in mdas.order[:t]]
    preset = []
    if t:
        if mode == "exact":
            p = exact_subnetwork_influence(model, prefix, cap=cap).p
        else:
            sub, nodes = induced_subnetwork(model, prefix)
            est = mc_influence(sub, mc_samples, rng_seed, node_probs=True)
            p = np.zeros(model.n)
            p[nodes] = est.node_p
        preset = [float(p[v]) for v in prefix]
    lb, sigma, ops = _recurse(model, mdas, preset, greedy)
    return LBVector(lb, sigma, mdas, ops, probabilistic=(mode == "mc" and t > 0))


def run_tunable(model: ICModel, params: TunableParams, which: str):
    """Dispatch on ``which`` in {"ub", "lb"} using a :class:`TunableParams`."""
    if which == "ub":
        if params.mode != "exact":
            raise InvalidParamsError("Monte Carlo initialisation is only defined for the lower bound")
        return t_nb_ub(model, params.t)
    return t_nb_lb(model, params.t, params.mode, params.mc_samples, params.rng_seed)
