import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from graphshift.discovery import DiscoveryConfig, discover
from graphshift.estimators import GraphFilter, GraphT2Test, SubgraphDiscovery
from graphshift.graph import laplacian
from graphshift.inference import TwoSampleData, graph_t2
from graphshift.simulate import planted_subgraph_data, random_connected_graph, random_connected_set
from graphshift.spectral import eigenbasis


@pytest.fixture
def graph():
    return random_connected_graph(12, 18, 3)


@pytest.fixture
def Xy(graph):
    rng = np.random.default_rng(0)
    X = rng.standard_normal((40, 12))
    y = np.repeat([0, 1], 20)
    X[y == 0, :3] += 0.6
    return X, y


class TestGraphFilter:
    def test_params(self, graph):
        f = GraphFilter(graph, variant="signed", k=4)
        assert f.get_params()["k"] == 4
        assert clone(f).get_params()["variant"] == "signed"
        f.set_params(k=5)
        assert f.k == 5

    def test_transform_matches_basis(self, graph, Xy):
        X, _ = Xy
        Z = GraphFilter(graph, k=4).fit_transform(X)
        U = eigenbasis(laplacian(graph)).U[:, :4]
        np.testing.assert_allclose(Z, X @ U)

    def test_default_k(self, graph):
        assert GraphFilter(graph).fit().k_ == 2

    def test_inverse_is_projection(self, graph, Xy):
        X, _ = Xy
        f = GraphFilter(graph, k=12).fit(X)
        np.testing.assert_allclose(f.inverse_transform(f.transform(X)), X, atol=1e-10)
        g = GraphFilter(graph, k=3).fit(X)
        P = g.inverse_transform(g.transform(X))
        np.testing.assert_allclose(g.inverse_transform(g.transform(P)), P, atol=1e-10)

    def test_not_fitted(self, graph, Xy):
        with pytest.raises(NotFittedError):
            GraphFilter(graph).transform(Xy[0])

    def test_column_mismatch(self, graph):
        with pytest.raises(ValueError):
            GraphFilter(graph).fit(np.ones((3, 5)))

    def test_requires_graph(self):
        with pytest.raises(TypeError):
            GraphFilter().fit()

    def test_in_pipeline(self, graph, Xy):
        X, _ = Xy
        Z = make_pipeline(StandardScaler(), GraphFilter(graph, k=3)).fit_transform(X)
        assert Z.shape == (40, 3)


class TestGraphT2Test:
    def test_matches_function(self, graph, Xy):
        X, y = Xy
        est = GraphT2Test(graph, k=3).fit(X, y)
        data = TwoSampleData(X[y == 0], X[y == 1])
        ref = graph_t2(data, eigenbasis(laplacian(graph)), 3)
        assert est.statistic_ == pytest.approx(ref.statistic)
        assert est.pvalue_ == pytest.approx(ref.pvalue)
        assert est.full_result_ is not None

    def test_full_result_undefined(self, graph):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((8, 12))
        est = GraphT2Test(graph, k=2).fit(X, [0, 0, 0, 0, 1, 1, 1, 1])
        assert est.full_result_ is None and 0 <= est.pvalue_ <= 1

    def test_three_labels_rejected(self, graph, Xy):
        X, _ = Xy
        with pytest.raises(ValueError):
            GraphT2Test(graph).fit(X, np.arange(40) % 3)

    def test_nan_rejected(self, graph, Xy):
        X, y = Xy
        X = X.copy()
        X[0, 0] = np.nan
        with pytest.raises(ValueError):
            GraphT2Test(graph).fit(X, y)


class TestSubgraphDiscovery:
    def test_matches_function(self, graph):
        planted = random_connected_set(graph, 4, 2)
        data = planted_subgraph_data(graph, planted, 30, 30, delta2=3.0, seed=4)
        X, mask = data.stacked()
        y = np.where(mask, 0, 1)
        est = SubgraphDiscovery(graph, q=4, k=3, alpha=1e-3).fit(X, y)
        ref = discover(graph, data, DiscoveryConfig(q=4, k=3, alpha=1e-3))
        assert [h.nodes for h in est.hits_] == [h.nodes for h in ref]
        assert all(len(ids) == 4 for ids in est.hit_node_ids_)
        summary = est.permutation_null(X, y, n_permutations=3, seed=1)
        assert summary.n_permutations == 3

    def test_clone(self, graph):
        est = SubgraphDiscovery(graph, q=3, bound_mode="euclidean", theta=0.5)
        assert clone(est).get_params()["theta"] == 0.5
