import numpy as np
import pytest
from hypothesis import strategies as st

from bspgraph.graph import Graph, build_graph


def cycle(n):
    return build_graph([(i, (i + 1) % n) for i in range(n)])


@pytest.fixture
def two_cycle():
    return cycle(2)


@pytest.fixture
def three_cycle():
    return cycle(3)


@st.composite
def edge_lists(draw, max_n=12, max_m=40, weighted=False):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, max_m))
    ends = st.integers(0, n - 1)
    if weighted:
        edge = st.tuples(ends, ends, st.integers(0, 20))
    else:
        edge = st.tuples(ends, ends)
    edges = draw(st.lists(edge, min_size=m, max_size=m))
    return n, edges


def graph_from(n, edges):
    src = [e[0] for e in edges]
    dst = [e[1] for e in edges]
    w = [float(e[2]) for e in edges] if edges and len(edges[0]) == 3 else None
    return Graph.from_arrays(n, np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64), w)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
