"""scikit-learn style wrappers around the graph basis, the filtered test and the subgraph search.

Hyperparameters are plain constructor arguments, so ``get_params``/``set_params``
and ``sklearn.base.clone`` work; fitted state lives in trailing-underscore
attributes.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .discovery import DiscoveryConfig, permutation_null, run_discovery
from .graph import Graph, laplacian
from .inference import SingularCovarianceError, TwoSampleData, graph_t2, hotelling_t2
from .spectral import eigenbasis, resolve_k


def _check_graph(graph) -> Graph:
    if not isinstance(graph, Graph):
        raise TypeError(f"graph must be a Graph, got {type(graph).__name__}")
    return graph


def _check_columns(X, graph: Graph) -> None:
    if X.shape[1] != graph.n_nodes:
        raise ValueError(f"X has {X.shape[1]} columns but the graph has {graph.n_nodes} nodes")


def _two_sample(X, y, graph: Graph) -> TwoSampleData:
    X, y = check_X_y(X, y, dtype=float)
    _check_columns(X, graph)
    return TwoSampleData.from_labels(X, y, graph.node_ids)


class GraphFilter(TransformerMixin, BaseEstimator):
    """Project observations onto the ``k`` smoothest graph components.

    Parameters
    ----------
    graph : Graph
    variant : str, default="combinatorial"
        Structure matrix, see :func:`graphshift.graph.laplacian`.
    k : int, optional
        Retained dimension. Defaults to ``round(k_frac * p)``.
    k_frac : float, default=0.2
    """

    def __init__(self, graph=None, variant="combinatorial", k=None, k_frac=0.2):
        self.graph = graph
        self.variant = variant
        self.k = k
        self.k_frac = k_frac

    def fit(self, X=None, y=None):
        graph = _check_graph(self.graph)
        if X is not None:
            _check_columns(check_array(X, dtype=float), graph)
        self.basis_ = eigenbasis(laplacian(graph, self.variant))
        self.k_ = resolve_k(graph.n_nodes, self.k, self.k_frac)
        self.components_ = self.basis_.components(self.k_).T
        self.n_features_in_ = graph.n_nodes
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X, dtype=float)
        _check_columns(X, self.graph)
        return X @ self.components_.T

    def inverse_transform(self, Z):
        """Map coefficients back to node space (the smooth part of the signal)."""
        check_is_fitted(self, "components_")
        Z = check_array(Z, dtype=float)
        return Z @ self.components_


class GraphT2Test(BaseEstimator):
    """Two-sample Hotelling test on the first ``k`` graph coefficients.

    After ``fit(X, y)``: ``result_`` (filtered test), ``full_result_`` (full
    space test, or ``None`` when undefined or singular), ``statistic_``,
    ``pvalue_`` and ``basis_``.
    """

    def __init__(self, graph=None, variant="combinatorial", k=None, k_frac=0.2):
        self.graph = graph
        self.variant = variant
        self.k = k
        self.k_frac = k_frac

    def fit(self, X, y):
        graph = _check_graph(self.graph)
        data = _two_sample(X, y, graph)
        self.basis_ = eigenbasis(laplacian(graph, self.variant))
        self.k_ = resolve_k(graph.n_nodes, self.k, self.k_frac)
        self.result_ = graph_t2(data, self.basis_, self.k_)
        try:
            self.full_result_ = hotelling_t2(data)
        except (ValueError, SingularCovarianceError):
            self.full_result_ = None
        self.statistic_ = self.result_.statistic
        self.pvalue_ = self.result_.pvalue
        self.n_features_in_ = graph.n_nodes
        return self


class SubgraphDiscovery(BaseEstimator):
    """Branch-and-bound search for connected ``q``-node subgraphs with shifted means.

    After ``fit(X, y)``: ``hits_`` (list of :class:`SubgraphHit`),
    ``hit_node_ids_`` and ``result_`` (search statistics).
    """

    def __init__(
        self,
        graph=None,
        q=5,
        k=3,
        alpha=1e-4,
        bound_mode="exact",
        theta=0.0,
        variant="combinatorial",
    ):
        self.graph = graph
        self.q = q
        self.k = k
        self.alpha = alpha
        self.bound_mode = bound_mode
        self.theta = theta
        self.variant = variant

    def _config(self) -> DiscoveryConfig:
        return DiscoveryConfig(
            q=self.q,
            k=self.k,
            alpha=self.alpha,
            bound_mode=self.bound_mode,
            theta=self.theta,
            structure_variant=self.variant,
        )

    def fit(self, X, y):
        graph = _check_graph(self.graph)
        data = _two_sample(X, y, graph)
        self.result_ = run_discovery(graph, data, self._config())
        self.hits_ = self.result_.hits
        self.hit_node_ids_ = [tuple(graph.node_ids[v] for v in h.nodes) for h in self.hits_]
        self.n_features_in_ = graph.n_nodes
        return self

    def permutation_null(self, X, y, n_permutations=100, seed=0):
        """Hit counts under label permutations of ``(X, y)``."""
        graph = _check_graph(self.graph)
        data = _two_sample(X, y, graph)
        return permutation_null(graph, data, self._config(), n_permutations, seed)

