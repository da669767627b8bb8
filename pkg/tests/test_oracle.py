import itertools

import numpy as np
import pytest

from infbound.errors import EmptySeedSetError, InvalidBoundsError, TooManyEdgesError
from infbound.graph import build_ic_model, from_undirected
from infbound.nbub import nb_ub
from infbound.oracle import (
    MC_CHUNK,
    exact_influence,
    exact_subnetwork_influence,
    mc_influence,
    path_union_prob,
    union_probability,
    variance_upper_bound,
)

from .conftest import A, B, C, D, E, brute_force_influence, random_small_models


class TestExactInfluence:
    def test_singleton(self):
        assert exact_influence(build_ic_model(1, [], [], [0])).sigma == 1.0

    @pytest.mark.parametrize("p", [0.0, 0.3, 1.0])
    def test_single_edge(self, p):
        assert exact_influence(build_ic_model(2, [(0, 1)], [p], [0])).sigma == pytest.approx(1 + p, abs=1e-15)

    def test_kite(self, kite):
        # 41/16 from exact rational enumeration of all 2^8 states
        res = exact_influence(kite(0.5))
        assert res.sigma == pytest.approx(41 / 16, abs=1e-15)
        np.testing.assert_allclose(res.p, [1, 5 / 8, 5 / 8, 5 / 16], atol=1e-15)
        assert res.sigma >= 2.4375

    def test_matches_brute_force(self):
        for m in random_small_models(40, seed=5, max_n=8, max_edges=14):
            np.testing.assert_allclose(exact_influence(m).p, brute_force_influence(m), atol=1e-12)

    def test_directed_with_multiple_seeds(self):
        rng = np.random.default_rng(1)
        edges = [(u, v) for u in range(6) for v in range(6) if u != v and rng.random() < 0.35]
        m = build_ic_model(6, edges, rng.random(len(edges)), [0, 3])
        np.testing.assert_allclose(exact_influence(m).p, brute_force_influence(m), atol=1e-12)

    def test_edge_order_invariant(self):
        rng = np.random.default_rng(2)
        for m in random_small_models(20, seed=9, max_n=10):
            perm = rng.permutation(m.n_edges)
            shuffled = build_ic_model(m.n, [m.edges[i] for i in perm], m.prob[perm], m.seeds)
            np.testing.assert_allclose(exact_influence(m).p, exact_influence(shuffled).p, atol=1e-13)

    def test_range_invariants(self):
        for m in random_small_models(20, seed=4):
            res = exact_influence(m)
            assert np.all((res.p >= 0) & (res.p <= 1 + 1e-12))
            assert np.all(res.p[list(m.seeds)] == 1.0)
            assert len(m.seeds) - 1e-12 <= res.sigma <= m.n + 1e-12

    def test_cap(self, monkeypatch):
        m = from_undirected(14, [(i, i + 1) for i in range(13)], 0.5, [0])
        with pytest.raises(TooManyEdgesError):
            exact_influence(m)
        monkeypatch.setenv("INFBOUND_ORACLE_CAP", "30")
        assert exact_influence(m).sigma == pytest.approx(sum(0.5**k for k in range(14)), abs=1e-12)
        with pytest.raises(TooManyEdgesError):
            exact_influence(m, cap=10)


class TestSubnetwork:
    def test_seed_subset(self, kite):
        res = exact_subnetwork_influence(kite(0.5), [A])
        assert res.sigma == 1.0 and res.p[A] == 1.0

    def test_full_subset_is_identical(self):
        for m in random_small_models(15, seed=12):
            full = exact_influence(m)
            sub = exact_subnetwork_influence(m, range(m.n))
            assert np.array_equal(full.p, sub.p) and full.sigma == sub.sigma

    def test_kite_abc(self, kite):
        res = exact_subnetwork_influence(kite(0.5), [A, B, C])
        # 5/8 by rational enumeration of the 2^6 states
        assert res.p[C] == pytest.approx(0.625, abs=1e-15)
        assert res.p[C] >= 0.5 + 0.25 - 0.125 - 1e-15
        assert res.p[D] == 0.0

    def test_no_seed(self, kite):
        with pytest.raises(EmptySeedSetError):
            exact_subnetwork_influence(kite(0.5), [B, C])


class TestMonteCarlo:
    def test_all_closed(self, kite):
        est = mc_influence(kite(0.0), 500, 1)
        assert est.mean == 1.0 and est.stderr == 0.0

    def test_all_open(self, kite):
        est = mc_influence(kite(1.0), 500, 1)
        assert est.mean == 4.0 and est.stderr == 0.0

    def test_deterministic(self, diamond):
        m = diamond(0.4)
        a = mc_influence(m, MC_CHUNK + 123, 77, node_probs=True)
        b = mc_influence(m, MC_CHUNK + 123, 77, node_probs=True)
        assert a.mean == b.mean and a.stderr == b.stderr and np.array_equal(a.node_p, b.node_p)
        assert mc_influence(m, 1000, 78).mean != mc_influence(m, 1000, 77).mean

    def test_prefix_stable_across_chunks(self, diamond):
        # the first chunk's samples do not depend on how many samples follow
        m = diamond(0.5)
        small = mc_influence(m, MC_CHUNK, 5)
        big = mc_influence(m, 2 * MC_CHUNK, 5)
        other = mc_influence(m, MC_CHUNK, 5)
        assert small.mean == other.mean
        assert big.samples == 2 * MC_CHUNK

    def test_single_sample(self, diamond):
        est = mc_influence(diamond(0.5), 1, 0)
        assert est.stderr == 0.0 and 1 <= est.mean <= 5

    def test_kite_within_4_stderr(self, kite):
        est = mc_influence(kite(0.5), 10**6, 2024)
        assert abs(est.mean - 41 / 16) <= 4 * est.stderr

    def test_node_probabilities(self, diamond):
        m = diamond(0.6)
        est = mc_influence(m, 40_000, 3, node_probs=True)
        exact = exact_influence(m).p
        se = np.sqrt(exact * (1 - exact) / est.samples)
        assert np.all(np.abs(est.node_p - exact) <= 5 * se + 1e-12)

    def test_mean_bounds(self):
        for m in random_small_models(10, seed=8):
            est = mc_influence(m, 300, 1)
            assert len(m.seeds) <= est.mean <= m.n

    def test_rejects_zero_samples(self, diamond):
        with pytest.raises(ValueError):
            mc_influence(diamond(0.5), 0)


# --- independent path-union oracle -------------------------------------------


def brute_paths(model, target, max_len, excluded=(), exact_len=None):
    """Edge lists of qualifying simple paths, by enumerating node sequences."""
    out = []
    others = [v for v in range(model.n) if not model.is_seed[v] and v not in excluded]
    for s in model.seeds:
        if s in excluded:
            continue
        for length in range(0, max_len + 1):
            if exact_len is not None and length != exact_len:
                continue
            for mid in itertools.permutations(others, length):
                seq = (s,) + mid
                if seq[-1] != target:
                    continue
                if all((seq[i], seq[i + 1]) in model.edge_id for i in range(length)):
                    out.append([model.edge_id[(seq[i], seq[i + 1])] for i in range(length)])
    return out


def brute_union(model, paths):
    used = sorted({e for p in paths for e in p})
    total = 0.0
    for state in itertools.product((False, True), repeat=len(used)):
        is_open = dict(zip(used, state))
        if any(all(is_open[e] for e in p) for p in paths):
            w = 1.0
            for e, s in zip(used, state):
                w *= model.prob[e] if s else 1.0 - model.prob[e]
            total += w
    return total


class TestPathUnion:
    def test_target_is_seed(self, diamond):
        for t in range(4):
            assert path_union_prob(diamond(0.3), B, t) == 1.0

    def test_chain(self):
        m = build_ic_model(3, [(0, 1), (1, 2)], [0.4, 0.4], [0])
        assert path_union_prob(m, 2, 2) == pytest.approx(0.16, abs=1e-15)
        assert path_union_prob(m, 2, 1) == 0.0

    @pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
    def test_diamond_one_hop(self, diamond, p):
        assert path_union_prob(diamond(p), A, 1) == pytest.approx(p, abs=1e-15)

    @pytest.mark.parametrize("p", [0.2, 0.5])
    def test_final_edge_diamond(self, diamond, p):
        m = diamond(p)
        assert path_union_prob(m, A, 1, with_final_edge=D) == pytest.approx(p * p, abs=1e-15)
        assert path_union_prob(m, D, 2, with_final_edge=E) == pytest.approx(2 * p**3 - p**5, abs=1e-15)
        # the only length-2 paths into d use a or c, so excluding a leaves one
        assert path_union_prob(m, D, 2, with_final_edge=A) == pytest.approx(p**3, abs=1e-15)

    def test_against_brute_force(self):
        rng = np.random.default_rng(3)
        for m in random_small_models(12, seed=21, max_n=7, max_edges=14):
            for target in range(m.n):
                t = int(rng.integers(0, 4))
                got = path_union_prob(m, target, t)
                assert got == pytest.approx(brute_union(m, brute_paths(m, target, t)), abs=1e-12)
                for e in m.out_adj[target]:
                    v = int(m.dst[e])
                    got = path_union_prob(m, target, t, with_final_edge=v)
                    ref = m.prob[e] * brute_union(m, brute_paths(m, target, t, excluded=(v,), exact_len=t))
                    assert got == pytest.approx(ref, abs=1e-12)

    def test_monotone(self):
        for m in random_small_models(10, seed=31, max_n=8):
            for v in range(m.n):
                vals = [path_union_prob(m, v, t) for t in range(m.n)]
                assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
                others = [w for w in range(m.n) if w != v and not m.is_seed[w]]
                if others:
                    assert path_union_prob(m, v, m.n - 1, excluded=others[:1]) <= vals[-1] + 1e-12

    def test_cap(self):
        m = from_undirected(8, [(i, j) for i in range(8) for j in range(i + 1, 8)], 0.5, [0])
        with pytest.raises(TooManyEdgesError):
            path_union_prob(m, 7, 4)

    def test_union_probability_edge_cases(self):
        assert union_probability([], [0.5]) == 0.0
        assert union_probability([0], [0.5]) == 1.0
        # two overlapping paths: P(e0 e1 or e0 e2) = p0 (1 - (1-p1)(1-p2))
        assert union_probability([0b011, 0b101], [0.5, 0.4, 0.3]) == pytest.approx(0.5 * (1 - 0.6 * 0.7))


class TestVarianceBound:
    def test_values(self):
        assert variance_upper_bound(10, 10) == 0
        assert variance_upper_bound(12, 8) == 4

    def test_invalid(self):
        with pytest.raises(InvalidBoundsError):
            variance_upper_bound(8, 12)
        assert variance_upper_bound(8, 8 + 1e-12) == 0.0

    def test_kite(self, kite):
        sp = nb_ub(kite(0.5)).sigma_plus
        assert variance_upper_bound(sp, 2.4375) == pytest.approx((sp - 2.4375) ** 2 / 4, abs=1e-15)

    def test_compared_with_sample_variance(self, kite):
        # reported, not asserted as an invariant: the formula is a heuristic for the variance
        from infbound.nblb import nb_lb

        m = kite(0.5)
        vb = variance_upper_bound(nb_ub(m).sigma_plus, nb_lb(m).sigma_minus)
        est = mc_influence(m, 20_000, 0)
        assert vb >= 0 and est.variance > 0
