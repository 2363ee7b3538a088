import dataclasses

import numpy as np
import pytest

from graphshift import discovery
from graphshift.discovery import (
    DiscoveryConfig,
    SubgraphHit,
    discover,
    euclidean_upper_bound,
    exact_upper_bound,
    miss_diagnostic,
    miss_threshold,
    permutation_null,
    run_discovery,
    score_subgraph,
)
from graphshift.graph import Edge, Graph, connected_subsets, induced_subgraph, laplacian
from graphshift.inference import TwoSampleData, hotelling_t2
from graphshift.simulate import random_connected_graph
from graphshift.spectral import eigenbasis

from helpers import brute_force_hits, discovery_instance


@pytest.mark.parametrize("i", range(12))
def test_exact_mode_matches_enumeration(i):
    graph, data, config = discovery_instance(i)
    hits = discover(graph, data, config)
    oracle = brute_force_hits(graph, data, config.q, config.k, config.alpha)
    assert {h.nodes for h in hits} == set(oracle)
    for h in hits:
        assert h.statistic == pytest.approx(oracle[h.nodes], rel=1e-8)


@pytest.mark.parametrize("i", range(8))
@pytest.mark.parametrize("theta", [0.1, 0.5, 1.0])
def test_euclidean_mode_subset_with_flagged_misses(i, theta):
    graph, data, config = discovery_instance(i)
    exact = {h.nodes: h for h in discover(graph, data, config)}
    approx = discover(graph, data, dataclasses.replace(config, bound_mode="euclidean", theta=theta))
    assert {h.nodes for h in approx} <= set(exact)
    for nodes in set(exact) - {h.nodes for h in approx}:
        check = miss_diagnostic(exact[nodes], theta, config.alpha, config.k, data.n1, data.n2)
        assert check.flagged


def test_vacuous_level_prunes_every_singleton(rng):
    graph = random_connected_graph(10, 15, 1)
    data = TwoSampleData(rng.standard_normal((20, 10)), rng.standard_normal((20, 10)), graph.node_ids)
    res = run_discovery(graph, data, DiscoveryConfig(q=4, k=2, alpha=1e-12))
    assert res.hits == [] and res.n_tested == 0
    assert res.n_bounds == 10 and len(res.pruned) == 10


def test_no_subgraph_tested_twice(monkeypatch):
    graph, data, config = discovery_instance(3)
    seen = []
    original = discovery._Scorer.test

    def recording(self, nodes, projection=None):
        seen.append(tuple(nodes))
        return original(self, nodes, projection)

    monkeypatch.setattr(discovery._Scorer, "test", recording)
    res = run_discovery(graph, data, dataclasses.replace(config, alpha=0.2))
    assert len(seen) == len(set(seen)) == res.n_tested
    assert res.n_tested <= len(connected_subsets(graph, config.q))


def test_q_larger_than_graph(rng):
    graph = random_connected_graph(4, 4, 0)
    data = TwoSampleData(rng.standard_normal((5, 4)), rng.standard_normal((5, 4)), graph.node_ids)
    with pytest.raises(ValueError):
        discover(graph, data, DiscoveryConfig(q=5, k=2, alpha=0.05))


def test_config_validation():
    with pytest.raises(ValueError):
        DiscoveryConfig(q=3, k=4, alpha=0.05)
    with pytest.raises(ValueError):
        DiscoveryConfig(q=3, k=2, alpha=1.5)
    with pytest.raises(ValueError):
        DiscoveryConfig(q=3, k=2, alpha=0.05, bound_mode="loose")
    with pytest.raises(ValueError):
        DiscoveryConfig(q=3, k=2, alpha=0.05, theta=-1)


def test_disconnected_graph(rng):
    g = Graph(tuple("abcdef"), (Edge(0, 1), Edge(1, 2), Edge(3, 4), Edge(4, 5)))
    X1 = rng.standard_normal((15, 6))
    X1[:, :3] += 1.5
    data = TwoSampleData(X1, rng.standard_normal((15, 6)), g.node_ids)
    hits = discover(g, data, DiscoveryConfig(q=3, k=2, alpha=0.05))
    assert {h.nodes for h in hits} == set(brute_force_hits(g, data, 3, 2, 0.05))


def test_singular_candidate_skipped(rng):
    graph = random_connected_graph(6, 8, 2)
    X1 = rng.standard_normal((10, 6))
    X2 = rng.standard_normal((10, 6))
    X1[:, 1] = X1[:, 0]
    X2[:, 1] = X2[:, 0]
    data = TwoSampleData(X1, X2, graph.node_ids)
    res = run_discovery(graph, data, DiscoveryConfig(q=3, k=3, alpha=0.5))
    assert res.skipped and all({0, 1} <= set(g) for g in res.skipped)


class TestBounds:
    def _supergraph_stats(self, graph, data, nodes, q, k):
        out = []
        for g in connected_subsets(graph, q):
            if set(nodes) <= set(g):
                out.append(score_subgraph(graph, data, g, DiscoveryConfig(q=q, k=k, alpha=0.05)))
        return out

    @pytest.mark.parametrize("seed", range(10))
    def test_exact_bound_sound(self, seed):
        rng = np.random.default_rng(seed)
        graph = random_connected_graph(9, 14, seed)
        X1 = rng.standard_normal((25, 9)) + rng.normal(0, 0.5, 9)
        data = TwoSampleData(X1, rng.standard_normal((22, 9)), graph.node_ids)
        q, k = 4, int(rng.integers(1, 4))
        for s in (1, 2, 3):
            for nodes in connected_subsets(graph, s)[:6]:
                bound = exact_upper_bound(graph, data, nodes, q, k)
                for hit in self._supergraph_stats(graph, data, nodes, q, k):
                    assert hit.statistic <= bound * (1 + 1e-10)

    def test_exact_bound_single_extension(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            p = int(rng.integers(4, 9))
            graph = random_connected_graph(p, int(rng.integers(p - 1, p * (p - 1) // 2 + 1)), rng)
            data = TwoSampleData(rng.standard_normal((12, p)) + rng.normal(0, 0.4, p), rng.standard_normal((12, p)), graph.node_ids)
            subsets = connected_subsets(graph, 2)
            nodes = subsets[int(rng.integers(len(subsets)))]
            k = int(rng.integers(1, 4))
            bound = exact_upper_bound(graph, data, nodes, 3, k)
            for hit in self._supergraph_stats(graph, data, nodes, 3, k):
                assert hit.statistic <= bound * (1 + 1e-10)

    def test_exact_bound_whole_graph(self, rng):
        graph = random_connected_graph(6, 8, 3)
        data = TwoSampleData(rng.standard_normal((20, 6)) + 0.3, rng.standard_normal((20, 6)), graph.node_ids)
        bound = exact_upper_bound(graph, data, ["g0"], 6, 2)
        assert bound == pytest.approx(hotelling_t2(data).statistic, rel=1e-12)

    def test_exact_bound_zero_shift(self, rng):
        graph = random_connected_graph(6, 8, 3)
        X = rng.standard_normal((10, 6))
        data = TwoSampleData(X, X[::-1].copy(), graph.node_ids)
        assert exact_upper_bound(graph, data, ["g2"], 3, 2) == pytest.approx(0, abs=1e-12)
        assert discover(graph, data, DiscoveryConfig(q=3, k=2, alpha=0.05)) == []

    def test_exact_bound_singular_is_infinite(self, rng):
        graph = random_connected_graph(8, 12, 3)
        data = TwoSampleData(rng.standard_normal((3, 8)), rng.standard_normal((3, 8)), graph.node_ids)
        assert exact_upper_bound(graph, data, ["g0"], 8, 2) == float("inf")

    @pytest.mark.parametrize("seed", range(10))
    def test_euclidean_bound_sound_and_monotone(self, seed):
        rng = np.random.default_rng(100 + seed)
        graph = random_connected_graph(9, 13, seed)
        data = TwoSampleData(rng.standard_normal((15, 9)) + rng.normal(0, 0.5, 9), rng.standard_normal((15, 9)), graph.node_ids)
        q, k = 4, 2
        delta = data.mean_difference()
        for g in connected_subsets(graph, q):
            U = eigenbasis(laplacian(induced_subgraph(graph, g), "combinatorial")).U[:, :k]
            proj = float(np.sum((U.T @ delta[list(g)]) ** 2))
            chain = [euclidean_upper_bound(graph, data, sub, q, k) for sub in self._chain(graph, g)]
            assert all(b >= proj - 1e-12 for b in chain)
            assert all(a >= b - 1e-12 for a, b in zip(chain, chain[1:]))
            assert chain[-1] == pytest.approx(float(np.sum(delta[list(g)] ** 2)))

    @staticmethod
    def _chain(graph, g):
        """A chain of connected subsets growing to ``g``."""
        nbrs = graph.neighbors()
        chain = [(g[0],)]
        while len(chain[-1]) < len(g):
            cur = set(chain[-1])
            nxt = next(v for v in g if v not in cur and any(w in cur for w in nbrs[v]))
            chain.append(tuple(sorted(cur | {nxt})))
        return chain

    def test_euclidean_zero_shift(self, rng):
        graph = random_connected_graph(6, 8, 3)
        X = rng.standard_normal((10, 6))
        data = TwoSampleData(X, X[::-1].copy(), graph.node_ids)
        assert euclidean_upper_bound(graph, data, ["g1"], 4, 2) == pytest.approx(0, abs=1e-20)
        cfg = DiscoveryConfig(q=3, k=2, alpha=0.05, bound_mode="euclidean", theta=0.01)
        assert run_discovery(graph, data, cfg).n_tested == 0


class TestMissDiagnostic:
    def test_identity_covariance(self):
        hit = SubgraphHit((0, 1), 1.0, 0.5, (0.0, 2.0), 1.0)
        check = miss_diagnostic(hit, 1.0, 1e-4, 3, 50, 50)
        assert check.min_eigenvalue == 1.0

    @pytest.mark.parametrize("theta,expected", [(0.5, 0.52), (1.0, 1.04)])
    def test_reported_pairings(self, theta, expected):
        assert miss_threshold(theta, 1e-4, 3, 50, 50) == pytest.approx(expected, abs=0.005)

    def test_constructed_miss_flagged(self):
        # tiny mean shift along a near-degenerate direction: huge T^2, small Euclidean norm
        rng = np.random.default_rng(5)
        graph = Graph(tuple("abc"), (Edge(0, 1), Edge(1, 2)))
        n = 30
        common = rng.standard_normal((2 * n, 1))
        X = np.hstack([common, common + 0.01 * rng.standard_normal((2 * n, 1)), rng.standard_normal((2 * n, 1))])
        X[:n, 1] += 0.05
        data = TwoSampleData(X[:n], X[n:], graph.node_ids)
        cfg = DiscoveryConfig(q=3, k=3, alpha=0.01)
        exact = discover(graph, data, cfg)
        approx = discover(graph, data, dataclasses.replace(cfg, bound_mode="euclidean", theta=0.5))
        assert [h.nodes for h in exact] == [(0, 1, 2)] and approx == []
        assert miss_diagnostic(exact[0], 0.5, 0.01, 3, n, n).flagged


class TestPermutationNull:
    def test_vacuous_level(self, rng):
        graph = random_connected_graph(8, 10, 1)
        data = TwoSampleData(rng.standard_normal((10, 8)), rng.standard_normal((10, 8)), graph.node_ids)
        summary = permutation_null(graph, data, DiscoveryConfig(q=3, k=2, alpha=1e-12), 5, 0)
        assert summary.hits_per_permutation == (0,) * 5 and summary.fraction_with_hits == 0

    def test_deterministic(self):
        graph, data, config = discovery_instance(5)
        a = permutation_null(graph, data, config, 6, 42)
        b = permutation_null(graph, data, config, 6, 42)
        assert a == b and len(a.hits_per_permutation) == 6

    def test_preserves_group_sizes(self, rng):
        graph, data, _ = discovery_instance(2)
        perm = discovery.permute_labels(data, rng)
        assert (perm.n1, perm.n2) == (data.n1, data.n2)
        X, _ = data.stacked()
        Xp, _ = perm.stacked()
        assert sorted(map(tuple, X)) == sorted(map(tuple, Xp))

    def test_requires_permutations(self):
        graph, data, config = discovery_instance(0)
        with pytest.raises(ValueError):
            permutation_null(graph, data, config, 0, 1)
