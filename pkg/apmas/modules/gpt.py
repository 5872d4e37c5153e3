"""
Graph Properties Test – structural identities of the Laplacian and its pseudoinverse.

Checks on every suite graph:
- L 1 = 0 exactly, L symmetric and positive semidefinite
- adjacency entries in {0, 1}, degree equals adjacency row sums
- eigendecomposition reconstructs L with orthonormal eigenvectors
- traversal and spectral connectivity agree
- pinv(L) is symmetric, annihilates 1 and satisfies pinv(L) L = I - 1 1^T / n
The traversal/spectral agreement is also checked on extra random graphs that
may be disconnected.

Contains:
- GPT class for performing the check.
- create() function as the entry point used by `apmas verify`.
"""

import networkx as nx
import numpy as np

from apmas.core.graph_core import (Graph, adjacency, degree, is_connected, is_connected_spectral,
                                   symmetric_eigendecomposition)
from apmas.helpers.property_check import PropertyCheck

__TESTLABEL__ = "Testing graph and Laplacian properties:"


class GPT(PropertyCheck):
    CODE = "GPT"
    LABEL = __TESTLABEL__
    EXTRA_GRAPHS = 60
    EXTRA_MAX_NODES = 12

    def check(self, run) -> None:
        g, L, Ldag = run.scenario.graph, run.L, run.Ldag
        n = g.n
        A = adjacency(g)

        if not np.all(L @ np.ones(n) == 0):
            self.fail(run.name, "L 1 is not exactly zero")
        if not np.array_equal(L, L.T):
            self.fail(run.name, "L is not symmetric")
        if not np.all((A == 0) | (A == 1)) or not np.array_equal(np.diag(degree(g)), A.sum(axis=1)):
            self.fail(run.name, "adjacency/degree mismatch")

        eigenvalues, Q = symmetric_eigendecomposition(L)
        self.expect(run.name, max(0.0, -float(eigenvalues[0])), 1e-10, "negative Laplacian eigenvalue")
        scale = 1.0 + np.max(np.abs(L))
        self.expect(run.name, np.max(np.abs(L - (Q * eigenvalues) @ Q.T)) / scale, 1e-9, "reconstruction error")
        self.expect(run.name, np.max(np.abs(Q.T @ Q - np.eye(n))), 1e-9, "eigenvector orthonormality")

        if is_connected(g) != is_connected_spectral(g):
            self.fail(run.name, "traversal and spectral connectivity disagree")

        pinv_scale = 1.0 + np.max(np.abs(Ldag))
        self.expect(run.name, np.max(np.abs(Ldag - Ldag.T)) / pinv_scale, 1e-12, "pinv asymmetry")
        self.expect(run.name, np.max(np.abs(Ldag @ np.ones(n))) / pinv_scale, 1e-9, "|pinv(L) 1|")
        projector = np.eye(n) - np.ones((n, n)) / n
        self.expect(run.name, np.max(np.abs(Ldag @ L - projector)), 1e-8, "|pinv(L) L - P|")
        self.expect(run.name, np.max(np.abs(L @ Ldag - projector)), 1e-8, "|L pinv(L) - P|")

    def standalone(self) -> None:
        rng = self.helpers.rng(salt=101)
        for k in range(self.EXTRA_GRAPHS):
            n = int(rng.integers(1, self.EXTRA_MAX_NODES + 1))
            g = Graph.from_networkx(nx.gnp_random_graph(n, float(rng.uniform(0.0, 0.5)),
                                                        seed=int(rng.integers(2**31 - 1))))
            if is_connected(g) != is_connected_spectral(g):
                self.fail(f"graph-{k:03d}", f"traversal and spectral connectivity disagree on {sorted(g.edges)}")


def create(args, ptjsonlib, helpers):
    """Entry point for the GPT check (Graph Properties Test)."""
    return GPT(args, ptjsonlib, helpers)
