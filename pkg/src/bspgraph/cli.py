"""Command-line runner: load a graph, run a program, write values and metrics.

Exit codes: 0 ok, 1 usage error, 2 load error, 3 run error,
4 verification mismatch.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass

from . import algorithms, oracles
from .algorithms import PROGRAMS, PageRankConfig
from .engine import EngineConfig, EngineError, run_program
from .formats import ParseError, parse_edge_list, write_metrics, write_vertex_values
from .graph import ConfigError, GraphError, build_graph

EXIT_OK, EXIT_USAGE, EXIT_LOAD, EXIT_RUN, EXIT_VERIFY = 0, 1, 2, 3, 4
PAGERANK_TOLERANCE = 1e-9


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    algorithm: str
    graph: str
    output: str | None = None
    metrics: str | None = None
    workers: int = 4
    max_supersteps: int = 30
    teleport: float = 0.15
    source: str | None = None
    convergence: float | None = None
    deterministic: bool = True
    checkpoint_interval: int = 0
    fail_worker: tuple[int, int] | None = None
    verify: bool = False


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fail_spec(text: str) -> tuple[int, int]:
    try:
        w, s = text.split("@")
        return int(w), int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WORKER@SUPERSTEP, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bspgraph", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--algorithm", required=True, choices=sorted(PROGRAMS))
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--output", help="vertex values (TSV); stdout if omitted")
    p.add_argument("--metrics", help="per-superstep metrics (JSON lines)")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--max-supersteps", type=int, default=30)
    p.add_argument("--teleport", type=float, default=0.15)
    p.add_argument("--source", help="source vertex label (sssp, bfs)")
    p.add_argument("--convergence", type=float, help="stop once the L1 change of values drops below this")
    p.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--checkpoint-interval", type=int, default=0)
    p.add_argument("--fail-worker", type=_fail_spec, metavar="W@S", help="kill worker W once at superstep S")
    p.add_argument("--verify", action="store_true", help="compare against the sequential oracle")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def parse_args(argv) -> CliConfig:
    ns = build_parser().parse_args(argv)
    if ns.algorithm in ("sssp", "bfs") and ns.source is None:
        raise UsageError(f"--source is required for {ns.algorithm}")
    if ns.algorithm not in ("sssp", "bfs") and ns.source is not None:
        raise UsageError(f"--source only applies to sssp and bfs")
    if ns.fail_worker is not None and ns.checkpoint_interval <= 0:
        raise UsageError("--fail-worker requires --checkpoint-interval > 0")
    if ns.workers < 1:
        raise UsageError("--workers must be >= 1")
    if ns.max_supersteps < 1:
        raise UsageError("--max-supersteps must be >= 1")
    if ns.checkpoint_interval < 0:
        raise UsageError("--checkpoint-interval must be >= 0")
    if ns.fail_worker is not None and not 0 <= ns.fail_worker[0] < ns.workers:
        raise UsageError(f"--fail-worker names worker {ns.fail_worker[0]} but only {ns.workers} exist")
    if not 0 < ns.teleport < 1:
        raise UsageError("--teleport must lie in (0, 1)")
    return CliConfig(
        algorithm=ns.algorithm, graph=ns.graph, output=ns.output, metrics=ns.metrics,
        workers=ns.workers, max_supersteps=ns.max_supersteps, teleport=ns.teleport,
        source=ns.source, convergence=ns.convergence, deterministic=ns.deterministic,
        checkpoint_interval=ns.checkpoint_interval, fail_worker=ns.fail_worker, verify=ns.verify,
    )


def load(cfg: CliConfig):
    with open(cfg.graph, encoding="utf-8") as fh:
        edges, values = parse_edge_list(fh.read())
    # weak components are only meaningful on the symmetrized graph
    g = build_graph(edges, directed=cfg.algorithm != "wcc", values=values or None)
    if g.n == 0:
        raise GraphError("graph has no vertices")
    source = None
    if cfg.source is not None:
        if cfg.source not in g.label_index:
            raise GraphError(f"source vertex {cfg.source!r} not in graph")
        source = g.label_index[cfg.source]
    if cfg.algorithm == "sssp":
        algorithms.check_weights(g)
    return g, source


def make_program(cfg: CliConfig, source):
    name = cfg.algorithm
    if name == "pagerank":
        return algorithms.pagerank_program(PageRankConfig(cfg.teleport, cfg.max_supersteps))
    if name in ("sssp", "bfs"):
        return PROGRAMS[name](source)
    if name == "labelprop":
        return algorithms.label_propagation_program(max_rounds=cfg.max_supersteps - 1)
    return PROGRAMS[name]()


def verify(cfg: CliConfig, g, source, result) -> tuple[bool, str]:
    got = [result.values[v] for v in range(g.n)]
    name = cfg.algorithm
    if name == "pagerank":
        want = oracles.pagerank_power_iteration(g, cfg.teleport, iters=result.last_superstep)
        dev = max(abs(a - b) for a, b in zip(got, want))
        return dev <= PAGERANK_TOLERANCE, f"max deviation {dev:.3g} (tolerance {PAGERANK_TOLERANCE:g})"
    if name == "sssp":
        want = oracles.dijkstra(g, source)
    elif name == "bfs":
        want = oracles.bfs_levels(g, source)
    elif name == "wcc":
        want = [float(x) for x in oracles.components_union_find(g)]
    elif name == "maxvalue":
        want = oracles.reachable_max(g, [float(x) for x in g.values])
    else:
        want = oracles.label_propagation_reference(g, max_rounds=cfg.max_supersteps - 1)
    bad = sum(1 for a, b in zip(got, want) if not (a == b or (math.isnan(a) and math.isnan(b))))
    return bad == 0, f"{bad} mismatched vertices (exact comparison)"


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(build_parser().format_usage().rstrip(), file=sys.stderr)
        print(f"bspgraph: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if "-v" in argv or "--verbose" in argv else logging.WARNING)

    try:
        g, source = load(cfg)
    except (OSError, ParseError, GraphError, UnicodeDecodeError) as exc:
        print(f"bspgraph: load error: {exc}", file=sys.stderr)
        return EXIT_LOAD

    engine_cfg = EngineConfig(
        workers=cfg.workers, max_supersteps=cfg.max_supersteps, deterministic=cfg.deterministic,
        checkpoint_interval=cfg.checkpoint_interval, failure_plan=cfg.fail_worker,
        convergence=cfg.convergence,
    )
    try:
        result = run_program(make_program(cfg, source), g, engine_cfg)
    except (EngineError, ConfigError, GraphError) as exc:
        print(f"bspgraph: run error: {exc}", file=sys.stderr)
        return EXIT_RUN

    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            write_vertex_values(result, sink=fh)
    else:
        write_vertex_values(result, sink=sys.stdout)
    if cfg.metrics:
        with open(cfg.metrics, "w", encoding="utf-8") as fh:
            write_metrics(result, sink=fh)

    print(
        f"bspgraph: {cfg.algorithm} finished after {result.supersteps_executed} supersteps "
        f"({result.termination}, recoveries={result.recoveries})",
        file=sys.stderr,
    )
    if cfg.verify:
        ok, detail = verify(cfg, g, source, result)
        print(f"bspgraph: verify {'ok' if ok else 'FAILED'}: {detail}", file=sys.stderr)
        if not ok:
            return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
