import io
import json

import pytest
from hypothesis import given, strategies as st

from bspgraph.algorithms import pagerank_program, sssp_program
from bspgraph.engine import EngineConfig, run_program
from bspgraph.formats import ParseError, parse_edge_list, write_edge_list, write_metrics, write_vertex_values
from bspgraph.graph import build_graph, random_graph


def test_parse_basic():
    edges, vals = parse_edge_list("0 1\n1 0\n")
    assert edges == [("0", "1", 1.0), ("1", "0", 1.0)]
    assert vals == {}


def test_parse_comment_and_weight():
    edges, _ = parse_edge_list("# comment\na b 2.5\n")
    assert edges == [("a", "b", 2.5)]


def test_parse_values():
    edges, vals = parse_edge_list("0 1\nv 0 3\nv 1 6\n\n")
    assert vals == {"0": 3.0, "1": 6.0}


@pytest.mark.parametrize("text,line", [("0 1\nx\n", 2), ("0 1 2 3\n", 1), ("a b -1\n", 1), ("a b w\n", 1), ("v a z\n", 1)])
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as info:
        parse_edge_list(text)
    assert info.value.lineno == line
    assert f"line {line}" in str(info.value)


def test_write_pagerank_two_cycle():
    g = build_graph([("0", "1"), ("1", "0")])
    text = write_vertex_values(run_program(pagerank_program(), g))
    rows = [line.split("\t") for line in text.splitlines()]
    assert [r[0] for r in rows] == ["0", "1"]
    assert all(abs(float(r[1]) - 0.5) <= 1e-9 for r in rows)


def test_write_inf_and_precision():
    g = build_graph([("0", "1", 0.1), ("1", "0", 0.2)], values={"2": 0})
    text = write_vertex_values(run_program(sssp_program(0), g))
    assert text == "0\t0\n1\t0.10000000000000001\n2\tinf\n"


def test_labels_sort_numerically_then_text():
    g = build_graph([("10", "2"), ("b", "a")])
    r = run_program(pagerank_program(), g)
    assert [l.split("\t")[0] for l in write_vertex_values(r).splitlines()] == ["2", "10", "a", "b"]


def test_write_to_sink():
    r = run_program(pagerank_program(), build_graph([(0, 1), (1, 0)]))
    buf = io.StringIO()
    assert write_vertex_values(r, sink=buf) == buf.getvalue()


def test_metrics_pagerank_cap():
    r = run_program(pagerank_program(), build_graph([(0, 1), (1, 0)]))
    lines = [json.loads(l) for l in write_metrics(r).splitlines()]
    assert len(lines) == 31
    assert list(lines[0]) == ["superstep", "active", "messages_sent", "wall_ms"]
    assert [l["superstep"] for l in lines[:30]] == list(range(30))
    assert lines[-1] == {"supersteps_executed": 30, "recoveries": 0}


def test_metrics_quiescent_ends_inactive():
    g = build_graph([(0, 1, 1), (1, 2, 1)])
    lines = [json.loads(l) for l in write_metrics(run_program(sssp_program(0), g)).splitlines()]
    assert lines[-2]["active"] == 0


def test_metrics_recovery_count():
    g = random_graph(30, 3, seed=0, sinkless=True)
    r = run_program(pagerank_program(), g, EngineConfig(workers=2, checkpoint_interval=5, failure_plan=(1, 10)))
    assert json.loads(write_metrics(r).splitlines()[-1])["recoveries"] == 1


label = st.text(alphabet="abcxyz0123456789_", min_size=1, max_size=4).filter(lambda s: s != "v")
weight = st.integers(0, 10**6).map(lambda k: k / 64)


@given(st.lists(st.tuples(label, label, weight), max_size=30), st.dictionaries(label, st.floats(-1e6, 1e6), max_size=5))
def test_round_trip(edges, vals):
    text = write_edge_list(edges, vals)
    e1, v1 = parse_edge_list(text)
    e2, v2 = parse_edge_list(write_edge_list(e1, v1))
    assert e1 == e2 == [(s, d, float(w)) for s, d, w in edges]
    assert v1 == v2 == {k: float(x) for k, x in vals.items()}


def test_output_byte_stable():
    g = random_graph(200, 4, seed=3)
    a = write_vertex_values(run_program(pagerank_program(), g, EngineConfig(workers=3)))
    b = write_vertex_values(run_program(pagerank_program(), g, EngineConfig(workers=3)))
    assert a == b
