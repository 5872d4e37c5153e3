"""
Graph Core – undirected agent graphs and their matrix representations.

Contains:
- Graph, an immutable undirected simple graph over 1-based node ids.
- adjacency / degree / laplacian matrices (dense numpy arrays).
- Exact connectivity by breadth-first traversal and a spectral cross-check.
- Symmetric eigendecomposition and the Laplacian pseudoinverse.
- Small graph generators (path, cycle, star, complete, random connected).

Node ids are 1-based everywhere outside this module's array indexing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
import scipy.linalg

from apmas.core.errors import InvalidGraph, NotLaplacian, NotSymmetric

SYMMETRY_TOL = 1e-12
PINV_RELATIVE_THRESHOLD = 1e-9
SPECTRAL_CONNECTIVITY_TOL = 1e-8


@dataclass(frozen=True)
class Graph:
    """
    Undirected simple graph on nodes 1..n.

    ``edges`` may be given as any iterable of pairs; it is stored as a frozenset of
    normalized ``(min, max)`` tuples. Self-loops, out-of-range ids and repeated pairs
    are rejected with the index of the offending entry.
    """
    n: int
    edges: frozenset = frozenset()

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidGraph("n", f"node count must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", _normalize_edges(self.n, self.edges))

    def neighbors(self, i: int) -> tuple[int, ...]:
        """Ascending neighbor ids of node ``i``."""
        return tuple(sorted({b if a == i else a for a, b in self.edges if i in (a, b)}))

    def neighbor_lists(self) -> dict[int, tuple[int, ...]]:
        lists = {i: [] for i in range(1, self.n + 1)}
        for a, b in self.edges:
            lists[a].append(b)
            lists[b].append(a)
        return {i: tuple(sorted(js)) for i, js in lists.items()}

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def max_degree(self) -> int:
        return max(len(js) for js in self.neighbor_lists().values())

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(1, self.n + 1))
        graph.add_edges_from(self.edges)
        return graph

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> "Graph":
        """Build from a networkx graph whose nodes are 0..n-1 or 1..n."""
        nodes = sorted(graph.nodes)
        offset = 1 if nodes and nodes[0] == 0 else 0
        return cls(graph.number_of_nodes(), frozenset((a + offset, b + offset) for a, b in graph.edges))


def _normalize_edges(n: int, edges: Iterable) -> frozenset:
    normalized = set()
    for index, edge in enumerate(edges):
        field = f"edges[{index}]"
        try:
            i, j = edge
        except (TypeError, ValueError):
            raise InvalidGraph(field, f"edge must be a pair of node ids, got {edge!r}") from None
        for node in (i, j):
            if isinstance(node, bool) or not isinstance(node, (int, np.integer)):
                raise InvalidGraph(field, f"node id must be an integer, got {node!r}")
            if not 1 <= node <= n:
                raise InvalidGraph(field, f"node id {node} outside [1, {n}]")
        if i == j:
            raise InvalidGraph(field, f"self-loop ({i}, {j}) is not allowed")
        pair = (int(min(i, j)), int(max(i, j)))
        if pair in normalized:
            raise InvalidGraph(field, f"duplicate edge {pair}")
        normalized.add(pair)
    return frozenset(normalized)


def adjacency(g: Graph) -> np.ndarray:
    matrix = np.zeros((g.n, g.n), dtype=np.int64)
    for i, j in g.edges:
        matrix[i - 1, j - 1] = 1
        matrix[j - 1, i - 1] = 1
    return matrix.astype(float)


def degree(g: Graph) -> np.ndarray:
    degrees = np.zeros(g.n, dtype=np.int64)
    for i, j in g.edges:
        degrees[i - 1] += 1
        degrees[j - 1] += 1
    return np.diag(degrees).astype(float)


def laplacian(g: Graph) -> np.ndarray:
    """D - A, formed in integer arithmetic so every row sums to exactly zero."""
    a = np.zeros((g.n, g.n), dtype=np.int64)
    for i, j in g.edges:
        a[i - 1, j - 1] = 1
        a[j - 1, i - 1] = 1
    return (np.diag(a.sum(axis=1)) - a).astype(float)


def is_connected(g: Graph) -> bool:
    """Breadth-first traversal from node 1 reaches every node."""
    return len(nx.node_connected_component(g.to_networkx(), 1)) == g.n


def _check_square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise NotSymmetric(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def symmetric_eigendecomposition(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a symmetric matrix.

    Raises:
        NotSymmetric: if ``m`` is not square or ``|m - m.T| > 1e-12`` anywhere.
    """
    m = _check_square(m)
    asymmetry = np.max(np.abs(m - m.T))
    if asymmetry > SYMMETRY_TOL:
        raise NotSymmetric(f"matrix is not symmetric (max |m - m.T| = {asymmetry:.3e})")
    eigenvalues, eigenvectors = scipy.linalg.eigh((m + m.T) / 2.0)
    return eigenvalues, eigenvectors


def laplacian_pseudoinverse(L: np.ndarray) -> np.ndarray:
    """
    Moore-Penrose pseudoinverse of a graph Laplacian.

    Eigenvalues at or below ``1e-9 * max(eigenvalue)`` are treated as zero, so a
    uniformly scaled Laplacian yields the uniformly scaled inverse.

    Raises:
        NotLaplacian: if ``L`` is not symmetric, has a non-zero row sum or a
            positive off-diagonal entry.
    """
    L = np.asarray(L, dtype=float)
    try:
        eigenvalues, eigenvectors = symmetric_eigendecomposition(L)
    except NotSymmetric as e:
        raise NotLaplacian(str(e)) from None
    scale = max(1.0, float(np.max(np.abs(L))))
    if np.max(np.abs(L.sum(axis=1))) > SYMMETRY_TOL * scale * L.shape[0]:
        raise NotLaplacian("rows of a Laplacian must sum to zero")
    off_diagonal = L - np.diag(np.diag(L))
    if np.any(off_diagonal > 0):
        raise NotLaplacian("off-diagonal entries of a Laplacian must be non-positive")

    threshold = PINV_RELATIVE_THRESHOLD * max(float(eigenvalues[-1]), 0.0)
    keep = eigenvalues > threshold
    vectors = eigenvectors[:, keep]
    return (vectors / eigenvalues[keep]) @ vectors.T


def algebraic_connectivity(g: Graph) -> float:
    """Second-smallest Laplacian eigenvalue, 0 for a single node."""
    if g.n == 1:
        return 0.0
    eigenvalues, _ = symmetric_eigendecomposition(laplacian(g))
    return float(eigenvalues[1])


def is_connected_spectral(g: Graph) -> bool:
    if g.n == 1:
        return True
    return algebraic_connectivity(g) > SPECTRAL_CONNECTIVITY_TOL


def relabel(g: Graph, perm: Sequence[int]) -> Graph:
    """
    Rename node ``i`` to ``perm[i - 1]``.

    ``perm`` is a permutation of 1..n.
    """
    if sorted(perm) != list(range(1, g.n + 1)):
        raise InvalidGraph("perm", f"not a permutation of 1..{g.n}")
    return Graph(g.n, frozenset((perm[i - 1], perm[j - 1]) for i, j in g.edges))


def path_graph(n: int) -> Graph:
    return Graph(n, frozenset((i, i + 1) for i in range(1, n)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        return path_graph(n)
    return Graph(n, frozenset((i, i % n + 1) for i in range(1, n + 1)))


def star_graph(n: int) -> Graph:
    return Graph(n, frozenset((1, i) for i in range(2, n + 1)))


def complete_graph(n: int) -> Graph:
    return Graph(n, frozenset((i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)))


def random_connected_graph(n: int, p: float, rng: np.random.Generator, max_tries: int = 1000) -> Graph:
    """
    Erdős–Rényi G(n, p), resampled until connected.

    Falls back to adding a random spanning path when ``max_tries`` samples were all
    disconnected (small p).
    """
    for _ in range(max_tries):
        sample = nx.gnp_random_graph(n, p, seed=int(rng.integers(2**31 - 1)))
        if n == 1 or nx.is_connected(sample):
            return Graph.from_networkx(sample)
    order = rng.permutation(n)
    sample.add_edges_from(zip(order[:-1].tolist(), order[1:].tolist()))
    return Graph.from_networkx(sample)
