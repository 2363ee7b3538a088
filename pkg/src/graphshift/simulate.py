"""Synthetic graphs, smooth-shift Gaussian samples, and ROC-based method comparisons.

Randomness: every public function takes an integer seed (or a
``numpy.random.Generator``) and draws from a Philox stream; experiment
replicates use children of one ``SeedSequence`` so that each dataset can be
regenerated on its own.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .graph import Edge, Graph, connected_subsets, induced_subgraph, laplacian, subgraph_boundary
from .inference import (
    SingularCovarianceError,
    TwoSampleData,
    critical_value,
    graph_t2,
    hotelling_t2,
    pca_t2,
)
from .spectral import SpectralBasis, eigenbasis

SCENARIOS = ("diag", "block", "corrupt-remove", "corrupt-add", "power-vs-k")


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def _node_ids(p: int) -> tuple[str, ...]:
    return tuple(f"g{i}" for i in range(p))


def random_connected_graph(p: int, m: int, seed) -> Graph:
    """Undirected, unsigned connected graph with ``p`` nodes and ``m`` edges.

    A random recursive spanning tree is completed with ``m - p + 1`` edges
    drawn uniformly among the remaining pairs.
    """
    if p < 1:
        raise ValueError("p must be positive")
    if m < p - 1:
        raise ValueError(f"a connected graph on {p} nodes needs at least {p - 1} edges")
    if m > p * (p - 1) // 2:
        raise ValueError(f"at most {p * (p - 1) // 2} edges fit on {p} nodes")
    rng = make_rng(seed)
    order = rng.permutation(p)
    pairs = set()
    for i in range(1, p):
        a, b = int(order[i]), int(order[rng.integers(i)])
        pairs.add((min(a, b), max(a, b)))
    free = [pr for pr in itertools.combinations(range(p), 2) if pr not in pairs]
    extra = rng.choice(len(free), size=m - len(pairs), replace=False) if m > len(pairs) else []
    pairs.update(free[i] for i in extra)
    return Graph(_node_ids(p), tuple(Edge(a, b, 1, False) for a, b in sorted(pairs)))


def hub_graph(
    target_p: int = 100,
    hub_size_mean: float = 10,
    seed=0,
    intra_density: float = 0.8,
    return_hubs: bool = False,
):
    """Chain of dense hubs with Poisson sizes, consecutive hubs joined by one bridge edge.

    Hubs are drawn until the node count reaches ``target_p``; the last hub is
    shortened if the total would exceed ``target_p + 10``. Each hub is a
    random spanning tree plus every other pair with probability
    ``intra_density``.
    """
    rng = make_rng(seed)
    sizes = []
    while sum(sizes) < target_p:
        sizes.append(max(2, int(rng.poisson(hub_size_mean))))
    overflow = sum(sizes) - (target_p + 10)
    if overflow > 0:
        sizes[-1] -= overflow
    pairs = set()
    hubs = []
    start = 0
    for size in sizes:
        nodes = list(range(start, start + size))
        hubs.append(tuple(nodes))
        order = rng.permutation(nodes)
        tree = set()
        for i in range(1, size):
            a, b = int(order[i]), int(order[rng.integers(i)])
            tree.add((min(a, b), max(a, b)))
        pairs |= tree
        for pr in itertools.combinations(nodes, 2):
            if pr not in tree and rng.random() < intra_density:
                pairs.add(pr)
        start += size
    for h0, h1 in zip(hubs, hubs[1:]):
        a, b = int(rng.choice(h0)), int(rng.choice(h1))
        pairs.add((a, b))
    graph = Graph(_node_ids(start), tuple(Edge(a, b, 1, False) for a, b in sorted(pairs)))
    return (graph, hubs) if return_hubs else graph


def corrupt_graph(graph: Graph, n_remove: int, n_add: int, seed) -> Graph:
    """Remove ``n_remove`` random edges and add ``n_add`` random unsigned undirected ones.

    Node set is unchanged; the result may be disconnected.
    """
    if n_remove < 0 or n_add < 0:
        raise ValueError("corruption counts must be nonnegative")
    if n_remove > graph.n_edges:
        raise ValueError(f"cannot remove {n_remove} of {graph.n_edges} edges")
    rng = make_rng(seed)
    drop = set(rng.choice(graph.n_edges, size=n_remove, replace=False).tolist()) if n_remove else set()
    kept = [e for i, e in enumerate(graph.edges) if i not in drop]
    occupied = {(min(e.src, e.dst), max(e.src, e.dst)) for e in graph.edges}
    free = [pr for pr in itertools.combinations(range(graph.n_nodes), 2) if pr not in occupied]
    if n_add > len(free):
        raise ValueError(f"cannot add {n_add} edges, only {len(free)} free pairs")
    picks = rng.choice(len(free), size=n_add, replace=False) if n_add else []
    kept.extend(Edge(*free[i], 1, False) for i in picks)
    return Graph(graph.node_ids, tuple(kept))


@dataclass(frozen=True)
class SynthesisConfig:
    p: int = 20
    m: int = 20
    k0: int = 3
    delta2: float = 1.0
    cov_kind: str = "diagonal"
    n1: int = 20
    n2: int = 20
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.k0 <= self.p:
            raise ValueError("need 1 <= k0 <= p")
        if self.delta2 < 0:
            raise ValueError("delta2 must be nonnegative")
        if self.cov_kind not in ("diagonal", "block"):
            raise ValueError(f"cov_kind must be 'diagonal' or 'block', got {self.cov_kind!r}")


def coefficient_covariance(p: int, k0: int, cov_kind: str = "diagonal") -> np.ndarray:
    """Covariance of the graph coefficients.

    Diagonal entries ``1/sqrt(p)``; in the block case the leading
    ``k0 x k0`` block has ``0.9/sqrt(p)`` on the diagonal and ``0.5/sqrt(p)``
    elsewhere.
    """
    S = np.eye(p) / np.sqrt(p)
    if cov_kind == "block":
        S[:k0, :k0] = 0.5 / np.sqrt(p)
        S[np.arange(k0), np.arange(k0)] = 0.9 / np.sqrt(p)
    elif cov_kind != "diagonal":
        raise ValueError(f"unknown covariance kind {cov_kind!r}")
    return S


def smooth_shift(cov: np.ndarray, k0: int, delta2: float) -> np.ndarray:
    """Coefficient shift equal on the first ``k0`` entries, zero after, with ``s^T cov^-1 s = delta2``."""
    p = cov.shape[0]
    direction = np.zeros(p)
    direction[:k0] = 1.0
    norm2 = direction[:k0] @ np.linalg.solve(cov[:k0, :k0], direction[:k0])
    return np.sqrt(delta2 / norm2) * direction


def synth_two_sample(basis: SpectralBasis, config: SynthesisConfig, rng=None) -> TwoSampleData:
    """Gaussian samples generated on graph coefficients and mapped back by the basis.

    Group 1 has coefficient mean equal to :func:`smooth_shift`, group 2 mean
    zero; both share :func:`coefficient_covariance`.
    """
    if basis.p != config.p:
        raise ValueError(f"basis dimension {basis.p} does not match p={config.p}")
    rng = make_rng(config.seed if rng is None else rng)
    cov = coefficient_covariance(config.p, config.k0, config.cov_kind)
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError("coefficient covariance is not positive definite") from exc
    shift = smooth_shift(cov, config.k0, config.delta2)
    Z1 = rng.standard_normal((config.n1, config.p)) @ L.T + shift
    Z2 = rng.standard_normal((config.n2, config.p)) @ L.T
    U = basis.U
    return TwoSampleData(Z1 @ U.T, Z2 @ U.T)


def random_connected_set(graph: Graph, size: int, seed) -> tuple[int, ...]:
    """Connected node set grown from a random node by random boundary additions."""
    rng = make_rng(seed)
    nbrs = graph.neighbors()
    for _ in range(100):
        nodes = (int(rng.integers(graph.n_nodes)),)
        while len(nodes) < size:
            ext = subgraph_boundary(graph, nodes, nbrs)
            if not ext:
                break
            nodes = ext[int(rng.integers(len(ext)))]
        if len(nodes) == size:
            return nodes
    raise ValueError(f"no connected set of size {size} found")


def planted_subgraph_data(
    graph: Graph,
    planted: tuple[int, ...],
    n1: int,
    n2: int,
    k0: int = 3,
    delta2: float = 1.0,
    variant: str = "combinatorial",
    seed=0,
) -> TwoSampleData:
    """Identity-covariance samples with a smooth mean shift supported on ``planted``.

    The shift lies in the first ``k0`` coefficients of the planted subgraph's
    own basis, evenly split, with squared norm ``delta2``.
    """
    rng = make_rng(seed)
    planted = graph.resolve(planted)
    basis = eigenbasis(laplacian(induced_subgraph(graph, planted), variant))
    coef = np.zeros(len(planted))
    coef[:k0] = np.sqrt(delta2 / k0)
    mu = np.zeros(graph.n_nodes)
    mu[list(planted)] = basis.U @ coef
    X1 = rng.standard_normal((n1, graph.n_nodes)) + mu
    X2 = rng.standard_normal((n2, graph.n_nodes))
    return TwoSampleData(X1, X2, graph.node_ids)


@dataclass(frozen=True)
class RocCurve:
    points: np.ndarray
    auc: float

    @property
    def fpr(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def tpr(self) -> np.ndarray:
        return self.points[:, 1]


def roc_curve(null_scores, alt_scores) -> RocCurve:
    """ROC of "alternative scores higher", sweeping thresholds over pooled unique scores.

    Tied scores move both rates at once, so the trapezoidal AUC equals the
    Mann-Whitney probability with ties counted as one half.
    """
    null = np.sort(np.asarray(null_scores, dtype=float))
    alt = np.sort(np.asarray(alt_scores, dtype=float))
    if len(null) == 0 or len(alt) == 0:
        raise ValueError("score lists must be nonempty")
    thresholds = np.unique(np.concatenate([null, alt]))[::-1]
    fpr = (len(null) - np.searchsorted(null, thresholds, side="left")) / len(null)
    tpr = (len(alt) - np.searchsorted(alt, thresholds, side="left")) / len(alt)
    fpr = np.concatenate([[0.0], fpr])
    tpr = np.concatenate([[0.0], tpr])
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))
    return RocCurve(np.column_stack([fpr, tpr]), auc)


@dataclass
class ExperimentResult:
    scenario: str
    seed: int
    n_null: int
    n_alt: int
    null_scores: dict = field(default_factory=dict)
    alt_scores: dict = field(default_factory=dict)
    null_pvalues: dict = field(default_factory=dict)
    alt_pvalues: dict = field(default_factory=dict)
    rocs: dict = field(default_factory=dict)

    def power(self, method: str, alpha: float = 0.05) -> float:
        return float(np.mean(np.asarray(self.alt_pvalues[method]) < alpha))

    def level(self, method: str, alpha: float = 0.05) -> float:
        return float(np.mean(np.asarray(self.null_pvalues[method]) < alpha))


@dataclass(frozen=True)
class Scenario:
    name: str
    p: int = 20
    m: int = 20
    k0: int = 3
    delta2: float = 1.0
    cov_kind: str = "diagonal"
    n1: int = 20
    n2: int = 20
    n_remove: int = 0
    n_add: int = 0
    graph_ks: tuple = (3,)
    pca_ks: tuple = (3,)
    full: bool = True
    variant: str = "combinatorial"


def scenario(name: str, **overrides) -> Scenario:
    """Preset experiment settings; keyword overrides replace individual fields."""
    presets = {
        "diag": dict(),
        "block": dict(cov_kind="block"),
        "corrupt-remove": dict(cov_kind="block", m=60, n_remove=20, graph_ks=(2, 3, 4), pca_ks=()),
        "corrupt-add": dict(cov_kind="block", m=20, n_add=20, graph_ks=(2, 3, 4), pca_ks=()),
        "power-vs-k": dict(k0=5, graph_ks=tuple(range(1, 21)), pca_ks=(), full=False),
    }
    if name not in presets:
        raise ValueError(f"unknown scenario {name!r}; expected one of {SCENARIOS}")
    return Scenario(name=name, **{**presets[name], **overrides})


def _method_tests(setting: Scenario, test_basis: SpectralBasis):
    tests = {}
    if setting.full:
        tests["hotelling"] = hotelling_t2
    for k in setting.graph_ks:
        tests[f"graph_k{k}"] = lambda d, k=k: graph_t2(d, test_basis, k)
    for k in setting.pca_ks:
        tests[f"pca_k{k}"] = lambda d, k=k: pca_t2(d, k)
    return tests


def run_experiment(
    name: str | Scenario,
    n_null: int = 1000,
    n_alt: int = 1000,
    seed: int = 0,
    graph_seed=None,
    corruption_seed=None,
) -> ExperimentResult:
    """Score matched null and alternative datasets with each method of a scenario.

    ``graph_seed`` and ``corruption_seed`` default to streams derived from
    ``seed``. Scores are the test statistics; p-values are kept for power.
    """
    setting = scenario(name) if isinstance(name, str) else name
    root = np.random.SeedSequence(seed)
    graph_ss, corrupt_ss, data_ss = root.spawn(3)
    truth = random_connected_graph(setting.p, setting.m, graph_ss if graph_seed is None else graph_seed)
    observed = truth
    if setting.n_remove or setting.n_add:
        observed = corrupt_graph(
            truth, setting.n_remove, setting.n_add, corrupt_ss if corruption_seed is None else corruption_seed
        )
    gen_basis = eigenbasis(laplacian(truth, setting.variant))
    test_basis = eigenbasis(laplacian(observed, setting.variant))
    tests = _method_tests(setting, test_basis)

    result = ExperimentResult(setting.name, seed, n_null, n_alt)
    for key in ("null", "alt"):
        for m in tests:
            getattr(result, f"{key}_scores")[m] = []
            getattr(result, f"{key}_pvalues")[m] = []
    children = data_ss.spawn(n_null + n_alt)
    for i, child in enumerate(children):
        key = "null" if i < n_null else "alt"
        cfg = SynthesisConfig(
            p=setting.p,
            m=setting.m,
            k0=setting.k0,
            delta2=0.0 if key == "null" else setting.delta2,
            cov_kind=setting.cov_kind,
            n1=setting.n1,
            n2=setting.n2,
        )
        data = synth_two_sample(gen_basis, cfg, make_rng(child))
        for m, test in tests.items():
            try:
                res = test(data)
                score, pval = res.statistic, res.pvalue
            except SingularCovarianceError:
                score, pval = np.nan, np.nan
            getattr(result, f"{key}_scores")[m].append(score)
            getattr(result, f"{key}_pvalues")[m].append(pval)
    for m in tests:
        null = np.asarray(result.null_scores[m])
        alt = np.asarray(result.alt_scores[m])
        result.rocs[m] = roc_curve(null[np.isfinite(null)], alt[np.isfinite(alt)])
    return result


def null_statistics(
    graph: Graph,
    k_values,
    n_datasets: int,
    n1: int = 20,
    n2: int = 20,
    seed=0,
    variant: str = "combinatorial",
) -> dict:
    """F-scaled filtered statistics and p-values on null datasets, keyed by ``k``."""
    basis = eigenbasis(laplacian(graph, variant))
    cfg = SynthesisConfig(p=graph.n_nodes, m=graph.n_edges, k0=1, delta2=0.0, n1=n1, n2=n2)
    out = {k: ([], []) for k in k_values}
    for child in np.random.SeedSequence(seed).spawn(n_datasets):
        data = synth_two_sample(basis, cfg, make_rng(child))
        for k in k_values:
            res = graph_t2(data, basis, k)
            out[k][0].append(res.f_statistic)
            out[k][1].append(res.pvalue)
    return {k: (np.asarray(f), np.asarray(pv)) for k, (f, pv) in out.items()}


def count_connected_subgraphs(graph: Graph, size: int) -> int:
    return len(connected_subsets(graph, size))


def empirical_rejection(pvalues, alpha: float) -> float:
    return float(np.mean(np.asarray(pvalues) < alpha))

