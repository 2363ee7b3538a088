"""Independent oracles shared by the unit and acceptance tests."""

import itertools

import numpy as np

from graphshift.discovery import DiscoveryConfig
from graphshift.graph import induced_subgraph, laplacian
from graphshift.inference import TwoSampleData
from graphshift.simulate import random_connected_graph
from graphshift.spectral import eigenbasis


def bfs_connected(adj, nodes):
    nodes = list(nodes)
    seen, stack = {nodes[0]}, [nodes[0]]
    while stack:
        v = stack.pop()
        for w in nodes:
            if w not in seen and adj[v, w]:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(nodes)


def brute_force_hits(graph, data, q, k, alpha, variant="combinatorial"):
    """Test every connected q-subset directly; returns {nodes: statistic} of significant ones."""
    from scipy import stats

    adj = (np.abs(graph.adjacency()) + np.abs(graph.adjacency()).T) > 0
    n1, n2 = data.n1, data.n2
    c = n1 * n2 / (n1 + n2)
    N = (n1 + n2 - k - 1) / ((n1 + n2 - 2) * k)
    crit = stats.f.isf(alpha, k, n1 + n2 - k - 1) / N
    d = data.X1.mean(0) - data.X2.mean(0)
    R = np.vstack([data.X1 - data.X1.mean(0), data.X2 - data.X2.mean(0)])
    S = R.T @ R / (n1 + n2 - 2)
    hits = {}
    for nodes in itertools.combinations(range(graph.n_nodes), q):
        if not bfs_connected(adj, nodes):
            continue
        U = eigenbasis(laplacian(induced_subgraph(graph, nodes), variant)).U[:, :k]
        idx = list(nodes)
        Sk = U.T @ S[np.ix_(idx, idx)] @ U
        dk = U.T @ d[idx]
        stat = c * dk @ np.linalg.solve(Sk, dk)
        if stat > crit:
            hits[nodes] = stat
    return hits


def discovery_instance(i):
    """Small graph, data and config; odd instances carry a local mean shift."""
    rng = np.random.default_rng(9000 + i)
    p = int(rng.integers(6, 13))
    m = int(rng.integers(p - 1, min(p * (p - 1) // 2, 2 * p) + 1))
    graph = random_connected_graph(p, m, 500 + i)
    q = int(rng.choice([3, 4]))
    k = int(rng.integers(1, min(3, q) + 1))
    n1, n2 = int(rng.integers(12, 30)), int(rng.integers(12, 30))
    X1 = rng.standard_normal((n1, p))
    X2 = rng.standard_normal((n2, p))
    if i % 2:
        start = int(rng.integers(p))
        hood = [start] + [int(v) for v in np.flatnonzero(graph.adjacency()[start])][:2]
        X1[:, hood] += 0.8
    data = TwoSampleData(X1, X2, graph.node_ids)
    alpha = float(rng.choice([0.01, 0.05]))
    return graph, data, DiscoveryConfig(q=q, k=k, alpha=alpha)


ACCEPTANCE_LINES = []


def record(criterion, passed, detail):
    """Print and keep a one-line verdict for an acceptance criterion."""
    line = f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed
