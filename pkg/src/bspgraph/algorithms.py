"""Built-in vertex programs.

Every value is a float. Distances use ``math.inf`` for unreachable
vertices; labels are integral floats.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .engine import SUM_AGGREGATOR, EngineConfig, VertexProgram, run_program
from .graph import ConfigError, Graph, GraphError
from .messages import MAX, MIN, SUM

INF = math.inf


@dataclass
class PageRankConfig:
    teleport: float = 0.15
    max_supersteps: int = 30
    init_value: float | None = None  # None means 1/N

    def __post_init__(self):
        if not 0 < self.teleport < 1:
            raise ConfigError(f"teleport must lie in (0, 1), got {self.teleport}")

    @property
    def damping(self) -> float:
        return 1 - self.teleport


def pagerank_program(cfg: PageRankConfig | None = None, combiner: bool = True) -> VertexProgram:
    cfg = cfg or PageRankConfig()
    teleport, damping, cap = cfg.teleport, cfg.damping, cfg.max_supersteps

    def compute(ctx, messages):
        if ctx.superstep >= 1:
            old = ctx.value
            total = 0.0
            for m in messages:
                total += m
            ctx.value = new = teleport / ctx.num_vertices + damping * total
            ctx.aggregate("l1_delta", abs(new - old))
        if ctx.superstep < cap:
            n = ctx.out_degree
            # dangling vertices send nothing; their mass leaks
            if n:
                ctx.send_to_all_neighbors(ctx.value / n)
        else:
            ctx.vote_to_halt()

    if cfg.init_value is None:
        def init(v, N):
            return 1.0 / N
    else:
        init_value = float(cfg.init_value)

        def init(v, N):
            return init_value

    return VertexProgram(
        "pagerank", compute, init,
        combiner=SUM if combiner else None,
        aggregators={"l1_delta": SUM_AGGREGATOR},
    )


def max_value_program(combiner: bool = True) -> VertexProgram:
    def compute(ctx, messages):
        if ctx.superstep == 0:
            ctx.send_to_all_neighbors(ctx.value)
            return
        own = ctx.value
        new = max(own, *messages) if messages else own
        if new > own:
            ctx.value = new
            ctx.send_to_all_neighbors(new)
        else:
            ctx.vote_to_halt()

    return VertexProgram("maxvalue", compute, None, combiner=MAX if combiner else None)


def sssp_program(source: int, combiner: bool = True) -> VertexProgram:
    def compute(ctx, messages):
        if ctx.superstep == 0:
            if ctx.vertex == source:
                for dst, w in ctx.out_edges():
                    ctx.send(dst, w)
        else:
            best = min(messages) if messages else INF
            if best < ctx.value:
                ctx.value = best
                for dst, w in ctx.out_edges():
                    ctx.send(dst, best + w)
        ctx.vote_to_halt()

    def init(v, N):
        return 0.0 if v == source else INF

    return VertexProgram("sssp", compute, init, combiner=MIN if combiner else None)


def bfs_program(source: int, combiner: bool = True) -> VertexProgram:
    def compute(ctx, messages):
        if ctx.superstep == 0:
            if ctx.vertex == source:
                ctx.send_to_all_neighbors(1.0)
        else:
            best = min(messages) if messages else INF
            if best < ctx.value:
                ctx.value = best
                ctx.send_to_all_neighbors(best + 1.0)
        ctx.vote_to_halt()

    def init(v, N):
        return 0.0 if v == source else INF

    return VertexProgram("bfs", compute, init, combiner=MIN if combiner else None)


def wcc_program(combiner: bool = True) -> VertexProgram:
    """Min-label propagation; run it on a symmetrized graph for weak components."""

    def compute(ctx, messages):
        if ctx.superstep == 0:
            ctx.send_to_all_neighbors(ctx.value)
        elif messages:
            m = min(messages)
            if m < ctx.value:
                ctx.value = m
                ctx.send_to_all_neighbors(m)
        ctx.vote_to_halt()

    def init(v, N):
        return float(v)

    return VertexProgram("wcc", compute, init, combiner=MIN if combiner else None)


def most_frequent(labels) -> float:
    """Most common label, lowest label on ties."""
    counts = Counter(labels)
    top = max(counts.values())
    return min(lab for lab, c in counts.items() if c == top)


def label_propagation_program(max_rounds: int = 10, tie_break: str = "lowest-label") -> VertexProgram:
    """Synchronous label propagation.

    Round ``r`` (superstep ``r >= 1``) adopts the most frequent label sent in
    round ``r - 1``. Every vertex keeps broadcasting until a round passes in
    which no label changed (read from the ``changed`` aggregator one
    superstep later) or ``max_rounds`` is reached.
    """
    if tie_break != "lowest-label":
        raise ConfigError(f"unsupported tie_break {tie_break!r}")

    def compute(ctx, messages):
        s = ctx.superstep
        if s >= 2 and ctx.aggregated("changed") == 0:
            ctx.vote_to_halt()
            return
        if s >= 1 and messages:
            new = most_frequent(messages)
            if new != ctx.value:
                ctx.value = new
                ctx.aggregate("changed", 1.0)
        if s < max_rounds:
            ctx.send_to_all_neighbors(ctx.value)
        else:
            ctx.vote_to_halt()

    def init(v, N):
        return float(v)

    return VertexProgram("labelprop", compute, init, combiner=None, aggregators={"changed": SUM_AGGREGATOR})


def check_weights(g: Graph):
    if len(g.weights) and not (g.weights >= 0).all():
        raise GraphError("negative edge weight; shortest paths need weights >= 0")


def pagerank_initial_value_insensitivity_check(
    g: Graph,
    inits: tuple[float | None, float | None] = (None, 0.5),
    teleport: float = 0.15,
    max_supersteps: int = 30,
    workers: int = 1,
) -> float:
    """L-infinity distance between PageRank runs that differ only in the init constant."""
    cfg = EngineConfig(workers=workers, max_supersteps=max_supersteps)
    runs = [
        run_program(pagerank_program(PageRankConfig(teleport, max_supersteps, init)), g, cfg).vector()
        for init in inits
    ]
    return float(np.nanmax(np.abs(runs[0] - runs[1])))


PROGRAMS = {
    "pagerank": pagerank_program,
    "maxvalue": max_value_program,
    "sssp": sssp_program,
    "bfs": bfs_program,
    "wcc": wcc_program,
    "labelprop": label_propagation_program,
}
