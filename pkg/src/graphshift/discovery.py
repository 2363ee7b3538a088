"""Branch-and-bound search for connected subgraphs whose two-sample means differ.

Every connected ``q``-node subgraph ``g`` is tested with the Hotelling
statistic on the first ``k`` coefficients of its own smooth basis. Partial
subgraphs are grown one boundary node at a time; a partial subgraph ``g'`` of
size ``s`` is pruned when an upper bound on the statistic of every
``q``-supergraph falls below the critical value:

* ``exact``: full-space T^2 on the ``(q - s)``-neighborhood of ``g'``. The
  filtered statistic of ``g`` is at most its full-space T^2, which is at most
  the T^2 of any node superset, and every connected ``q``-supergraph of ``g'``
  lies inside that neighborhood.
* ``euclidean``: squared norm of the mean shift on ``g'`` plus the ``q - s``
  largest squared per-node shifts in the neighborhood, compared with a
  threshold ``theta`` on ``||U_k^T (xbar1 - xbar2)||^2``. Subgraphs passing
  the threshold are then tested exactly, so the result is a subset of the
  exact hits; misses have a small-variance projected direction (see
  :func:`miss_threshold`).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, induced_subgraph, laplacian, subgraph_boundary
from .inference import (
    SingularCovarianceError,
    TwoSampleData,
    critical_value,
    f_scaling,
    mahalanobis,
    pooled_covariance,
)
from .distributions import f_sf
from .spectral import eigenbasis

logger = logging.getLogger(__name__)

BOUND_MODES = ("exact", "euclidean")


@dataclass(frozen=True)
class DiscoveryConfig:
    q: int
    k: int
    alpha: float
    bound_mode: str = "exact"
    theta: float = 0.0
    structure_variant: str = "combinatorial"

    def __post_init__(self):
        if not 1 <= self.k <= self.q:
            raise ValueError(f"need 1 <= k <= q, got k={self.k}, q={self.q}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.bound_mode not in BOUND_MODES:
            raise ValueError(f"bound_mode must be one of {BOUND_MODES}, got {self.bound_mode!r}")
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")


@dataclass(frozen=True)
class SubgraphHit:
    nodes: tuple[int, ...]
    statistic: float
    pvalue: float
    basis_eigenvalues: tuple[float, ...]
    min_projected_cov_eigenvalue: float


@dataclass
class DiscoveryResult:
    hits: list[SubgraphHit]
    n_tested: int = 0
    n_bounds: int = 0
    pruned: set = field(default_factory=set)
    preselection_rejects: int = 0
    skipped: list = field(default_factory=list)
    critical_value: float = float("nan")


@dataclass(frozen=True)
class PermutationSummary:
    n_permutations: int
    hits_per_permutation: tuple[int, ...]
    seed: int

    @property
    def fraction_with_hits(self) -> float:
        if not self.n_permutations:
            return 0.0
        return sum(h > 0 for h in self.hits_per_permutation) / self.n_permutations


class _Scorer:
    """Shared per-run quantities: mean shift, pooled covariance, hop distances."""

    def __init__(self, graph: Graph, data: TwoSampleData, config: DiscoveryConfig):
        if data.p != graph.n_nodes:
            raise ValueError(f"data has {data.p} columns, graph has {graph.n_nodes} nodes")
        if data.node_ids is not None and tuple(data.node_ids) != graph.node_ids:
            raise ValueError("data columns are not aligned with graph nodes")
        self.graph = graph
        self.config = config
        self.n1, self.n2 = data.n1, data.n2
        self.scale = data.scale
        self.delta = data.mean_difference()
        self.sq_shift = self.delta**2
        self.cov = pooled_covariance(data)
        self.dist = graph.distances()
        self.neighbors = graph.neighbors()
        self.crit = critical_value(config.alpha, config.k, data.n1, data.n2)

    def neighborhood(self, nodes, r: int) -> np.ndarray:
        return np.flatnonzero(self.dist[list(nodes)].min(axis=0) <= r)

    def full_t2(self, idx) -> float:
        idx = np.asarray(idx)
        return self.scale * mahalanobis(self.delta[idx], self.cov[np.ix_(idx, idx)])

    def exact_bound(self, nodes, q: int) -> float:
        hood = self.neighborhood(nodes, q - len(nodes))
        try:
            return self.full_t2(hood)
        except SingularCovarianceError:
            return float("inf")

    def euclidean_bound(self, nodes, q: int) -> float:
        nodes = list(nodes)
        free = q - len(nodes)
        base = float(self.sq_shift[nodes].sum())
        if free <= 0:
            return base
        hood = np.setdiff1d(self.neighborhood(nodes, free), nodes)
        extra = np.sort(self.sq_shift[hood])[::-1][:free]
        return base + float(extra.sum())

    def bound(self, nodes, q: int) -> float:
        if self.config.bound_mode == "exact":
            return self.exact_bound(nodes, q)
        return self.euclidean_bound(nodes, q)

    def prunable(self, nodes, q: int) -> bool:
        b = self.bound(nodes, q)
        if self.config.bound_mode == "exact":
            return b < self.crit
        return b <= self.config.theta

    def local_directions(self, nodes):
        sub = induced_subgraph(self.graph, nodes)
        basis = eigenbasis(laplacian(sub, self.config.structure_variant))
        k = self.config.k
        return basis.components(k), basis.eigenvalues[:k]

    def project(self, nodes):
        Uk, lams = self.local_directions(nodes)
        return Uk, lams, Uk.T @ self.delta[np.asarray(nodes)]

    def test(self, nodes, projection=None):
        """Filtered statistic, p-value and projected-covariance diagnostics for ``nodes``."""
        idx = np.asarray(nodes)
        Uk, lams, d = projection if projection is not None else self.project(nodes)
        S = Uk.T @ self.cov[np.ix_(idx, idx)] @ Uk
        S = 0.5 * (S + S.T)
        stat = self.scale * mahalanobis(d, S)
        k = self.config.k
        pval = float(f_sf(f_scaling(k, self.n1, self.n2) * stat, k, self.n1 + self.n2 - k - 1))
        min_eig = float(np.linalg.eigvalsh(S)[0])
        return stat, pval, tuple(float(v) for v in lams), min_eig


def _contains_pruned(nodes: tuple[int, ...], pruned: set) -> bool:
    if not pruned:
        return False
    for r in range(1, len(nodes)):
        for sub in itertools.combinations(nodes, r):
            if sub in pruned:
                return True
    return False


def run_discovery(graph: Graph, data: TwoSampleData, config: DiscoveryConfig) -> DiscoveryResult:
    """Branch-and-bound search; returns hits plus search statistics."""
    q = config.q
    if q > graph.n_nodes:
        raise ValueError(f"q={q} exceeds the number of nodes ({graph.n_nodes})")
    sc = _Scorer(graph, data, config)
    result = DiscoveryResult(hits=[], critical_value=sc.crit)
    pruned = result.pruned

    def final_test(g):
        projection = None
        if config.bound_mode == "euclidean":
            # squared shift on g bounds its projection; skip the basis when it already fails
            if sc.euclidean_bound(g, q) <= config.theta:
                result.preselection_rejects += 1
                return
            projection = sc.project(g)
            d = projection[2]
            if float(d @ d) <= config.theta:
                result.preselection_rejects += 1
                return
        try:
            stat, pval, lams, min_eig = sc.test(g, projection)
        except SingularCovarianceError as exc:
            logger.info("skipping subgraph %s: %s", g, exc)
            result.skipped.append(g)
            return
        result.n_tested += 1
        if stat > sc.crit:
            result.hits.append(SubgraphHit(g, stat, pval, lams, min_eig))

    singletons = [(v,) for v in range(graph.n_nodes)]
    if q == 1:
        for g in singletons:
            final_test(g)
        return result

    current = []
    for g in singletons:
        result.n_bounds += 1
        if sc.prunable(g, q):
            pruned.add(g)
        else:
            current.append(g)

    for size in range(2, q + 1):
        checked = set()
        nxt = []
        for parent in current:
            for g in subgraph_boundary(graph, parent, sc.neighbors):
                if g in checked:
                    continue
                checked.add(g)
                if _contains_pruned(g, pruned):
                    continue
                if size == q:
                    final_test(g)
                    continue
                result.n_bounds += 1
                if sc.prunable(g, q):
                    pruned.add(g)
                else:
                    nxt.append(g)
        current = nxt

    result.hits.sort(key=lambda h: h.nodes)
    return result


def discover(graph: Graph, data: TwoSampleData, config: DiscoveryConfig) -> list[SubgraphHit]:
    """Connected ``q``-node subgraphs whose filtered statistic exceeds the level-alpha critical value."""
    return run_discovery(graph, data, config).hits


def exact_upper_bound(graph: Graph, data: TwoSampleData, current_nodes, q: int, k: int) -> float:
    """Full-space T^2 on the ``(q - s)``-neighborhood of ``current_nodes``; ``inf`` if singular."""
    nodes = graph.resolve(current_nodes)
    sc = _Scorer(graph, data, DiscoveryConfig(q=q, k=k, alpha=0.5))
    return sc.exact_bound(nodes, q)


def euclidean_upper_bound(graph: Graph, data: TwoSampleData, current_nodes, q: int, k: int) -> float:
    """Upper bound on ``||U_k^T (xbar1 - xbar2)||^2`` over connected ``q``-supergraphs."""
    nodes = graph.resolve(current_nodes)
    sc = _Scorer(graph, data, DiscoveryConfig(q=q, k=k, alpha=0.5, bound_mode="euclidean"))
    return sc.euclidean_bound(nodes, q)


def miss_threshold(theta: float, alpha: float, k: int, n1: int, n2: int) -> float:
    """Eigenvalue level below which a Euclidean-mode miss must fall.

    A subgraph significant at level ``alpha`` whose projected squared mean
    shift is at most ``theta`` has a projected covariance eigenvalue below
    ``n1 n2 / (n1 + n2) * theta / T^2_{alpha,k}``.
    """
    return n1 * n2 / (n1 + n2) * theta / critical_value(alpha, k, n1, n2)


@dataclass(frozen=True)
class MissCheck:
    min_eigenvalue: float
    threshold: float

    @property
    def flagged(self) -> bool:
        return self.min_eigenvalue < self.threshold


def miss_diagnostic(hit_candidate: SubgraphHit, theta, alpha, k, n1, n2) -> MissCheck:
    """Smallest projected covariance eigenvalue of a tested subgraph and the miss threshold."""
    return MissCheck(
        hit_candidate.min_projected_cov_eigenvalue, miss_threshold(theta, alpha, k, n1, n2)
    )


def score_subgraph(graph: Graph, data: TwoSampleData, nodes, config: DiscoveryConfig) -> SubgraphHit:
    """Filtered statistic of a single node set, reported as a (possibly non-significant) hit record."""
    nodes = graph.resolve(nodes)
    stat, pval, lams, min_eig = _Scorer(graph, data, config).test(nodes)
    return SubgraphHit(nodes, stat, pval, lams, min_eig)


def permute_labels(data: TwoSampleData, rng: np.random.Generator) -> TwoSampleData:
    """Shuffle group labels, keeping both group sizes."""
    X, _ = data.stacked()
    perm = rng.permutation(len(X))
    Xp = X[perm]
    return TwoSampleData(Xp[: data.n1], Xp[data.n1 :], data.node_ids)


def permutation_null(
    graph: Graph,
    data: TwoSampleData,
    config: DiscoveryConfig,
    n_permutations: int,
    seed: int,
) -> PermutationSummary:
    """Hit counts of the discovery procedure on label-permuted data.

    Replicate ``i`` draws its permutation from the ``i``-th child of
    ``SeedSequence(seed)``, so results do not depend on execution order.
    """
    if n_permutations < 1:
        raise ValueError("n_permutations must be >= 1")
    children = np.random.SeedSequence(seed).spawn(n_permutations)
    counts = []
    for child in children:
        rng = np.random.Generator(np.random.Philox(child))
        counts.append(len(discover(graph, permute_labels(data, rng), config)))
    return PermutationSummary(n_permutations, tuple(counts), seed)
