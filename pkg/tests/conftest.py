import itertools

import networkx as nx
import pytest
from hypothesis import strategies as st

from lcmer.graphcore import Graph


def to_nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


def from_nx(h: nx.Graph) -> Graph:
    mapping = {v: k for k, v in enumerate(sorted(h.nodes()))}
    return Graph.from_edges(len(mapping), [(mapping[a], mapping[b]) for a, b in h.edges()])


def atlas(max_n: int, connected_only: bool = False) -> list[Graph]:
    out = []
    for h in nx.graph_atlas_g()[1:]:
        if h.number_of_nodes() > max_n:
            continue
        if connected_only and not nx.is_connected(h):
            continue
        out.append(from_nx(h))
    return out


@st.composite
def graphs(draw, min_n=1, max_n=7):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.integers(0, (1 << len(pairs)) - 1))
    return Graph.from_edges(n, [e for k, e in enumerate(pairs) if (mask >> k) & 1])


@pytest.fixture
def k3():
    return Graph.complete(3)
