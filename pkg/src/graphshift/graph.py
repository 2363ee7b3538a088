"""Signed, optionally directed graphs and the energy operators built on them.

Node sets passed to the functions below may be given either as node
identifiers (strings) or as integer indices into ``Graph.node_ids``;
they are always returned as sorted tuples of indices.
"""

from __future__ import annotations

import csv
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

VARIANTS = ("combinatorial", "normalized", "signed", "directed_mg")
_VARIANT_ALIASES = {
    "laplacian": "combinatorial",
    "combinatorial": "combinatorial",
    "normalized": "normalized",
    "signed": "signed",
    "mg": "directed_mg",
    "directed_mg": "directed_mg",
}


class GraphError(ValueError):
    """Invalid graph construction or lookup."""


class DegenerateDegreeError(GraphError):
    """A degree-normalized operator was requested on a graph with an isolated node."""


class Edge(NamedTuple):
    src: int
    dst: int
    sign: int = 1
    directed: bool = False


@dataclass(frozen=True)
class Graph:
    """Immutable signed graph.

    Parameters
    ----------
    node_ids : sequence of str
        Unique node identifiers; their order defines node indices.
    edges : sequence of Edge
        ``(src, dst, sign, directed)`` with integer endpoints. An undirected
        edge is stored once and contributes to both ``a[src, dst]`` and
        ``a[dst, src]``.
    """

    node_ids: tuple[str, ...]
    edges: tuple[Edge, ...] = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        node_ids = tuple(str(v) for v in self.node_ids)
        object.__setattr__(self, "node_ids", node_ids)
        index = {v: i for i, v in enumerate(node_ids)}
        if len(index) != len(node_ids):
            raise GraphError("node identifiers must be unique")
        object.__setattr__(self, "_index", index)

        p = len(node_ids)
        edges = tuple(Edge(int(e[0]), int(e[1]), int(e[2]), bool(e[3])) for e in self.edges)
        seen = set()
        entries = {}
        for e in edges:
            if not (0 <= e.src < p and 0 <= e.dst < p):
                raise GraphError(f"edge {e} references a missing node")
            if e.src == e.dst:
                raise GraphError(f"self-loop on node {node_ids[e.src]!r}")
            if e.sign not in (1, -1):
                raise GraphError(f"edge sign must be +1 or -1, got {e.sign}")
            key = (e.src, e.dst, True) if e.directed else (min(e.src, e.dst), max(e.src, e.dst), False)
            if key in seen:
                raise GraphError(f"duplicate edge {node_ids[e.src]!r}-{node_ids[e.dst]!r}")
            seen.add(key)
            cells = [(e.src, e.dst)] if e.directed else [(e.src, e.dst), (e.dst, e.src)]
            for cell in cells:
                if cell in entries:
                    raise GraphError(
                        f"overlapping edges on {node_ids[cell[0]]!r}->{node_ids[cell[1]]!r}"
                    )
                entries[cell] = e.sign
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[Sequence],
        nodes: Iterable[str] | None = None,
    ) -> "Graph":
        """Build a graph from ``(src_id, dst_id[, sign[, directed]])`` tuples.

        Nodes are taken from ``nodes`` (if given) followed by any endpoint not
        yet seen, in order of first appearance. Repeated edges are collapsed
        with a warning; repeated edges with different signs raise.
        """
        node_ids = list(nodes) if nodes is not None else []
        index = {v: i for i, v in enumerate(node_ids)}
        kept = {}
        for raw in edges:
            src, dst = str(raw[0]), str(raw[1])
            sign = int(raw[2]) if len(raw) > 2 else 1
            directed = bool(int(raw[3])) if len(raw) > 3 else False
            for v in (src, dst):
                if v not in index:
                    index[v] = len(node_ids)
                    node_ids.append(v)
            s, d = index[src], index[dst]
            key = (s, d, True) if directed else (min(s, d), max(s, d), False)
            if key in kept:
                if kept[key].sign != sign:
                    raise GraphError(f"conflicting signs for edge {src!r}-{dst!r}")
                warnings.warn(f"duplicate edge {src!r}-{dst!r} collapsed", stacklevel=2)
                continue
            kept[key] = Edge(s, d, sign, directed)
        return cls(tuple(node_ids), tuple(kept.values()))

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def index(self, node_id: str) -> int:
        try:
            return self._index[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id!r}") from None

    def resolve(self, nodes: Iterable) -> tuple[int, ...]:
        """Map node ids or indices to a sorted tuple of unique indices."""
        out = set()
        for v in nodes:
            if isinstance(v, (int, np.integer)):
                if not 0 <= v < self.n_nodes:
                    raise GraphError(f"node index {v} out of range")
                out.add(int(v))
            else:
                out.add(self.index(v))
        return tuple(sorted(out))

    def adjacency(self) -> np.ndarray:
        """Signed adjacency matrix, ``a[i, j] != 0`` iff there is an edge i -> j."""
        p = self.n_nodes
        A = np.zeros((p, p))
        for e in self.edges:
            A[e.src, e.dst] = e.sign
            if not e.directed:
                A[e.dst, e.src] = e.sign
        return A

    def skeleton(self) -> np.ndarray:
        """Symmetric signed adjacency of the undirected version of the graph.

        Reciprocal directed edges of opposite sign cancel out.
        """
        A = self.adjacency()
        return np.sign(A + A.T)

    def degrees(self) -> np.ndarray:
        """Row sums of ``|A|``."""
        return np.abs(self.adjacency()).sum(axis=1)

    def indegrees(self) -> np.ndarray:
        """Column sums of ``|A|``: number of edges pointing into each node."""
        return np.abs(self.adjacency()).sum(axis=0)

    def neighbors(self) -> list[list[int]]:
        """Undirected adjacency lists, ignoring direction and sign."""
        nbrs = [set() for _ in range(self.n_nodes)]
        for e in self.edges:
            nbrs[e.src].add(e.dst)
            nbrs[e.dst].add(e.src)
        return [sorted(s) for s in nbrs]

    def distances(self) -> np.ndarray:
        """All-pairs hop distances on the undirected skeleton (``inf`` if unreachable)."""
        if self.n_nodes == 0:
            return np.zeros((0, 0))
        A = np.abs(self.adjacency())
        W = csr_matrix(((A + A.T) > 0).astype(float))
        return shortest_path(W, method="D", directed=False, unweighted=True)


@dataclass(frozen=True)
class StructureMatrix:
    """Positive semi-definite energy operator of a graph."""

    variant: str
    Q: np.ndarray

    @property
    def p(self) -> int:
        return self.Q.shape[0]


def _variant_name(variant: str) -> str:
    try:
        return _VARIANT_ALIASES[variant]
    except KeyError:
        raise ValueError(f"unknown structure variant {variant!r}; expected one of {VARIANTS}") from None


def laplacian(graph: Graph, variant: str = "combinatorial") -> StructureMatrix:
    """Structure matrix of ``graph``.

    ``combinatorial`` is ``D - W`` and ``normalized`` is
    ``I - D^-1/2 W D^-1/2``, where ``W`` marks node pairs joined by any edge;
    ``signed`` is ``D - S`` with ``S`` the signed skeleton and
    ``D = Diag(|S| 1)``. The three Laplacians ignore edge direction. ``directed_mg`` is ``B^T B`` with ``B = I~ - D_in^-1 A^T``,
    where rows of nodes without in-edges are zero.
    """
    variant = _variant_name(variant)
    p = graph.n_nodes
    if variant == "directed_mg":
        A = graph.adjacency()
        indeg = np.abs(A).sum(axis=0)
        has_parents = indeg != 0
        B = np.zeros((p, p))
        B[has_parents] = -A.T[has_parents] / indeg[has_parents, None]
        B[has_parents, np.flatnonzero(has_parents)] += 1.0
        Q = B.T @ B
    else:
        if variant == "signed":
            S = graph.skeleton()
            W = np.abs(S)
        else:
            absA = np.abs(graph.adjacency())
            W = ((absA + absA.T) > 0).astype(float)
        d = W.sum(axis=1)
        if variant == "combinatorial":
            Q = np.diag(d) - W
        elif variant == "signed":
            Q = np.diag(d) - S
        else:
            if np.any(d == 0):
                raise DegenerateDegreeError("normalized Laplacian undefined for isolated nodes")
            inv_sqrt = 1.0 / np.sqrt(d)
            Q = np.eye(p) - inv_sqrt[:, None] * W * inv_sqrt[None, :]
    Q = 0.5 * (Q + Q.T)
    Q.setflags(write=False)
    return StructureMatrix(variant, Q)


def energy(Q: StructureMatrix | np.ndarray, delta) -> float:
    """Quadratic energy ``delta^T Q delta``."""
    M = Q.Q if isinstance(Q, StructureMatrix) else np.asarray(Q)
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (M.shape[0],):
        raise ValueError(f"delta has shape {delta.shape}, expected ({M.shape[0]},)")
    return float(delta @ M @ delta)


def directed_energy(graph: Graph, delta) -> float:
    """Sum over nodes with parents of the squared deviation from the signed parent average."""
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (graph.n_nodes,):
        raise ValueError(f"delta has shape {delta.shape}, expected ({graph.n_nodes},)")
    parents = [[] for _ in range(graph.n_nodes)]
    for e in graph.edges:
        parents[e.dst].append((e.src, e.sign))
        if not e.directed:
            parents[e.src].append((e.dst, e.sign))
    total = 0.0
    for i, par in enumerate(parents):
        if par:
            avg = sum(s * delta[j] for j, s in par) / len(par)
            total += (delta[i] - avg) ** 2
    return total


def neighborhood(graph: Graph, seed_nodes: Iterable, r: int) -> tuple[int, ...]:
    """Seed nodes plus all nodes within ``r`` hops of one of them.

    Distances ignore edge direction and sign.
    """
    seeds = graph.resolve(seed_nodes)
    if not seeds:
        raise GraphError("neighborhood of an empty seed set")
    if r < 0:
        raise ValueError("radius must be nonnegative")
    nbrs = graph.neighbors()
    dist = {v: 0 for v in seeds}
    queue = deque(seeds)
    while queue:
        v = queue.popleft()
        if dist[v] == r:
            continue
        for w in nbrs[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return tuple(sorted(dist))


def is_connected_set(graph: Graph, node_set: Iterable, neighbors=None) -> bool:
    nodes = set(graph.resolve(node_set))
    if not nodes:
        return False
    nbrs = neighbors if neighbors is not None else graph.neighbors()
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in nbrs[v]:
            if w in nodes and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(nodes)


def subgraph_boundary(graph: Graph, node_set: Iterable, neighbors=None) -> list[tuple[int, ...]]:
    """All node sets obtained by adding one node adjacent to ``node_set``.

    Returned in ascending order of the added node.
    """
    nodes = graph.resolve(node_set)
    nbrs = neighbors if neighbors is not None else graph.neighbors()
    members = set(nodes)
    added = sorted({w for v in nodes for w in nbrs[v] if w not in members})
    return [tuple(sorted(members | {w})) for w in added]


def connected_subsets(graph: Graph, size: int) -> list[tuple[int, ...]]:
    """Every connected node set of the given size, sorted."""
    if size < 1:
        raise ValueError("size must be positive")
    nbrs = graph.neighbors()
    level = {(v,) for v in range(graph.n_nodes)}
    for _ in range(size - 1):
        level = {s for g in level for s in subgraph_boundary(graph, g, nbrs)}
    return sorted(level)


def induced_subgraph(graph: Graph, node_set: Iterable) -> Graph:
    """Subgraph keeping the given nodes (in graph order) and the edges between them."""
    nodes = graph.resolve(node_set)
    remap = {v: i for i, v in enumerate(nodes)}
    edges = tuple(
        Edge(remap[e.src], remap[e.dst], e.sign, e.directed)
        for e in graph.edges
        if e.src in remap and e.dst in remap
    )
    return Graph(tuple(graph.node_ids[v] for v in nodes), edges)


def connected_components(graph: Graph) -> list[Graph]:
    """Induced subgraphs of the weakly connected components, ordered by smallest node."""
    nbrs = graph.neighbors()
    seen = [False] * graph.n_nodes
    components = []
    for start in range(graph.n_nodes):
        if seen[start]:
            continue
        seen[start] = True
        comp = [start]
        stack = [start]
        while stack:
            v = stack.pop()
            for w in nbrs[v]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    stack.append(w)
        components.append(induced_subgraph(graph, comp))
    return components


GRAPH_HEADER = ["src", "dst", "sign", "directed"]


def read_graph_tsv(path) -> Graph:
    """Read a graph from a ``src dst sign directed`` TSV file."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != GRAPH_HEADER:
            raise GraphError(f"{path}: expected header {GRAPH_HEADER}, got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise GraphError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            src, dst, sign, directed = (c.strip() for c in row)
            if not src or not dst:
                raise GraphError(f"{path}:{lineno}: empty node id")
            if sign not in ("1", "+1", "-1"):
                raise GraphError(f"{path}:{lineno}: sign must be +1 or -1, got {sign!r}")
            if directed not in ("0", "1"):
                raise GraphError(f"{path}:{lineno}: directed must be 0 or 1, got {directed!r}")
            rows.append((src, dst, int(sign), int(directed)))
    return Graph.from_edges(rows)


def write_graph_tsv(graph: Graph, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(GRAPH_HEADER)
        for e in graph.edges:
            writer.writerow(
                [graph.node_ids[e.src], graph.node_ids[e.dst], f"{e.sign:+d}", int(e.directed)]
            )
