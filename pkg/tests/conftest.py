import networkx as nx
import numpy as np
import pytest
from hypothesis import strategies as st

from combocd.graph import Graph, karate_club


def two_triangles() -> Graph:
    """Triangles {0,1,2} and {3,4,5} joined by the bridge 2-3."""
    return Graph.from_edges(6, [(0, 1, 1), (0, 2, 1), (1, 2, 1), (3, 4, 1), (3, 5, 1), (4, 5, 1), (2, 3, 1)])


def triangle() -> Graph:
    return Graph.from_edges(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])


def four_cycle() -> Graph:
    return Graph.from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])


def random_connected_graph(rng, n, p=0.4, weighted=True, selfloops=False) -> Graph:
    while True:
        G = nx.gnp_random_graph(n, p, seed=int(rng.integers(1 << 30)))
        if n == 1 or nx.is_connected(G):
            break
    edges = [(u, v, float(rng.integers(1, 5)) if weighted else 1.0) for u, v in G.edges()]
    if selfloops:
        edges += [(u, u, float(rng.integers(1, 3))) for u in range(n) if rng.random() < 0.2]
    if not edges:
        edges = [(0, 0, 1.0)]
    return Graph.from_edges(n, edges)


@st.composite
def graphs(draw, min_n=2, max_n=12, selfloops=True):
    """Random weighted graphs with at least one edge; may be disconnected."""
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u if selfloops else u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=3 * n))
    weights = draw(st.lists(st.floats(0.1, 10.0), min_size=len(chosen), max_size=len(chosen)))
    return Graph.from_edges(n, [(u, v, w) for (u, v), w in zip(chosen, weights)])


@st.composite
def graph_and_labels(draw, **kw):
    g = draw(graphs(**kw))
    k = draw(st.integers(1, g.n))
    labels = draw(st.lists(st.integers(0, k - 1), min_size=g.n, max_size=g.n))
    return g, np.asarray(labels)


@pytest.fixture
def karate():
    return karate_club()


@pytest.fixture(scope="session")
def warm_jit():
    """Compile (or load cached) kernels once so timings exclude JIT."""
    from combocd.combo import ComboConfig, optimize

    optimize(two_triangles(), ComboConfig())
    optimize(two_triangles(), ComboConfig(objective="codelength"))


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
