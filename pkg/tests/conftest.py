import itertools

import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from apmas.core.graph_core import Graph, path_graph
from apmas.core.input_layout import InputLayout


@st.composite
def graphs(draw, min_nodes=1, max_nodes=8):
    """Any simple graph on 1..n, connected or not."""
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, frozenset(pair for pair, keep in zip(pairs, mask) if keep))


@st.composite
def connected_graphs(draw, min_nodes=1, max_nodes=8):
    """A random spanning tree plus random extra edges."""
    n = draw(st.integers(min_nodes, max_nodes))
    order = draw(st.permutations(range(1, n + 1)))
    edges = set()
    for k in range(1, n):
        parent = order[draw(st.integers(0, k - 1))]
        edges.add(tuple(sorted((parent, order[k]))))
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges.update(pair for pair, keep in zip(pairs, mask) if keep)
    return Graph(n, frozenset(edges))


@st.composite
def layouts(draw, n):
    m = draw(st.integers(1, n))
    inputs = []
    for _ in range(m):
        targets = draw(st.lists(st.integers(1, n), min_size=1, max_size=n, unique=True))
        value = draw(st.floats(-100.0, 100.0, allow_nan=False, allow_infinity=False))
        inputs.append((value, tuple(targets)))
    return InputLayout(n, inputs)


@st.composite
def symmetric_matrices(draw, max_size=8, bound=100.0):
    n = draw(st.integers(1, max_size))
    elements = st.floats(-bound, bound, allow_nan=False, allow_infinity=False)
    m = draw(hnp.arrays(np.float64, (n, n), elements=elements))
    return np.triu(m) + np.triu(m, 1).T


def state_vectors(n, bound=10.0):
    return hnp.arrays(np.float64, n, elements=st.floats(-bound, bound, allow_nan=False, allow_infinity=False))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def p2():
    return path_graph(2), InputLayout(2, [(4.0, (1,))])


@pytest.fixture
def p3_middle():
    return path_graph(3), InputLayout(3, [(1.0, (2,))])


@pytest.fixture
def p2_document():
    return {"name": "p2", "n": 2, "edges": [[1, 2]], "inputs": [{"value": 4.0, "targets": [1]}], "t_final": 40.0}
