"""Bulk-synchronous vertex-centric execution engine.

Logical workers each own the vertices ``v`` with ``v % workers == w``.
Workers run one after another inside a superstep; they only interact at
the barrier, where messages are routed, aggregators reduced, mutations
applied and checkpoints taken.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import checkpoint as ckpt
from .graph import ConfigError, Graph, GraphError, assign_partitions
from .messages import Combiner, MessageBatch, combine_inbox, deliver_messages, group_inbox
from .mutation import Mutation, apply_mutations

log = logging.getLogger(__name__)

CONTINUE = "continue"
QUIESCENT = "quiescent"
CAP = "max_supersteps"
CONVERGED = "converged"


class EngineError(RuntimeError):
    pass


class VertexComputeError(EngineError):
    def __init__(self, vertex, superstep, cause):
        super().__init__(f"compute failed at vertex {vertex}, superstep {superstep}: {cause!r}")
        self.vertex = vertex
        self.superstep = superstep


class RoutingError(EngineError):
    pass


class AggregatorError(EngineError):
    pass


class MutationError(EngineError):
    pass


@dataclass(frozen=True)
class Aggregator:
    identity: float
    reduce: Callable[[float, float], float]


SUM_AGGREGATOR = Aggregator(0.0, lambda a, b: a + b)


@dataclass
class VertexProgram:
    """Hook bundle run once per active vertex per superstep.

    ``compute(ctx, messages)`` acts only through ``ctx``. ``init(v, N)`` gives
    starting values; when it is None the graph's loaded vertex values are used.
    """

    name: str
    compute: Callable
    init: Callable[[int, int], float] | None = None
    combiner: Combiner | None = None
    aggregators: dict[str, Aggregator] = field(default_factory=dict)


@dataclass
class EngineConfig:
    workers: int = 1
    max_supersteps: int = 30
    deterministic: bool = True
    checkpoint_interval: int = 0
    failure_plan: tuple[int, int] | None = None
    convergence: float | None = None

    def validate(self):
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.max_supersteps < 1:
            raise ConfigError(f"max_supersteps must be >= 1, got {self.max_supersteps}")
        if self.checkpoint_interval < 0:
            raise ConfigError("checkpoint_interval must be >= 0")
        if self.failure_plan is not None:
            if self.checkpoint_interval <= 0:
                raise ConfigError("failure_plan requires checkpoint_interval > 0")
            w, s = self.failure_plan
            if not 0 <= w < self.workers or s < 0:
                raise ConfigError(f"failure_plan {self.failure_plan} outside workers/supersteps")
        if self.convergence is not None and not self.convergence > 0:
            raise ConfigError("convergence threshold must be positive")


@dataclass
class SuperstepMetrics:
    superstep: int
    active: int
    messages_sent: int
    combined_messages: int
    wall_ms: float


@dataclass
class SuperstepOutcome:
    superstep: int
    computed: int
    active: int
    messages_sent: int
    combined_messages: int
    wall_ms: float
    decision: str
    values_changed: int = 0
    failed_worker: int | None = None


@dataclass
class RunResult:
    values: dict[int, float]
    graph: Graph
    supersteps_executed: int
    last_superstep: int
    metrics: list[SuperstepMetrics]
    recoveries: int
    checkpoints: int
    termination: str
    aggregates: dict[str, float]

    def vector(self) -> np.ndarray:
        out = np.full(self.graph.n, np.nan)
        for v, x in self.values.items():
            out[v] = x
        return out


def reduce_aggregators(partials: list[dict], specs: dict[str, Aggregator]) -> dict[str, float]:
    """Fold per-worker partial aggregates in worker-index order."""
    out = {name: spec.identity for name, spec in specs.items()}
    for part in partials:
        for name, x in part.items():
            spec = specs.get(name)
            if spec is None:
                raise AggregatorError(f"unknown aggregator {name!r}")
            out[name] = spec.reduce(out[name], x)
    return out


def check_termination(
    superstep: int,
    all_halted: bool,
    pending: int,
    max_supersteps: int,
    l1_delta: float | None = None,
    threshold: float | None = None,
) -> str:
    """Decide at the barrier before ``superstep`` whether the run is over."""
    if all_halted and pending == 0:
        return QUIESCENT
    if superstep >= max_supersteps:
        return CAP
    if threshold is not None and l1_delta is not None and l1_delta < threshold:
        return CONVERGED
    return CONTINUE


class Context:
    """Per-vertex view handed to ``compute``; reused across vertices."""

    __slots__ = ("_engine", "_worker", "vertex", "superstep", "num_vertices")

    def __init__(self, engine: BSPEngine, worker: Worker):
        self._engine = engine
        self._worker = worker
        self.vertex = -1
        self.superstep = 0
        self.num_vertices = 0

    @property
    def value(self) -> float:
        return self._engine._values[self.vertex]

    @value.setter
    def value(self, x):
        self._engine._values[self.vertex] = x

    @property
    def out_degree(self) -> int:
        return self._engine._degrees[self.vertex]

    def out_edges(self) -> list[tuple[int, float]]:
        g = self._engine.graph
        lo, hi = g.offsets[self.vertex], g.offsets[self.vertex + 1]
        return list(zip(g.targets[lo:hi].tolist(), g.weights[lo:hi].tolist()))

    def send(self, target: int, payload: float):
        w = self._worker
        w.out_t.append(target)
        w.out_s.append(self.vertex)
        w.out_p.append(payload)

    def send_to_all_neighbors(self, payload: float):
        self._worker.bc_s.append(self.vertex)
        self._worker.bc_p.append(payload)

    def vote_to_halt(self):
        self._engine._halted[self.vertex] = True

    def aggregate(self, name: str, x: float):
        spec = self._engine.program.aggregators.get(name)
        if spec is None:
            raise AggregatorError(f"unknown aggregator {name!r}")
        part = self._worker.partials
        part[name] = spec.reduce(part.get(name, spec.identity), x)

    def aggregated(self, name: str) -> float:
        """Global value of ``name`` as reduced at the previous barrier."""
        try:
            return self._engine.aggregates[name]
        except KeyError:
            raise AggregatorError(f"unknown aggregator {name!r}") from None

    def _request(self, m: Mutation):
        self._worker.mutations.append((self.vertex, m))

    def add_edge(self, src, dst, weight=1.0):
        self._request(Mutation.add_edge(src, dst, weight))

    def remove_edge(self, src, dst):
        self._request(Mutation.remove_edge(src, dst))

    def add_vertex(self, vertex, value=None):
        self._request(Mutation.add_vertex(vertex, value))

    def remove_vertex(self, vertex):
        self._request(Mutation.remove_vertex(vertex))


class Worker:
    def __init__(self, index: int):
        self.index = index
        self.vertices: list[int] = []
        self.inbox = MessageBatch.empty()
        self.reset()

    def reset(self):
        self.out_t, self.out_s, self.out_p = [], [], []
        self.bc_s, self.bc_p = [], []
        self.partials: dict[str, float] = {}
        self.mutations: list[tuple[int, Mutation]] = []

    def outbox(self, g: Graph) -> MessageBatch:
        direct = MessageBatch(
            np.array(self.out_t, np.int64), np.array(self.out_s, np.int64), np.array(self.out_p, np.float64)
        )
        if not self.bc_s:
            return direct
        s = np.array(self.bc_s, np.int64)
        deg = g.offsets[s + 1] - g.offsets[s]
        total = int(deg.sum())
        start = np.repeat(g.offsets[s] - np.cumsum(deg) + deg, deg)
        idx = start + np.arange(total)
        bcast = MessageBatch(g.targets[idx], np.repeat(s, deg), np.repeat(np.array(self.bc_p, np.float64), deg))
        return MessageBatch.concat([direct, bcast])


class BSPEngine:
    def __init__(self, program: VertexProgram, graph: Graph, config: EngineConfig | None = None):
        self.config = config = config or EngineConfig()
        config.validate()
        if graph.num_vertices == 0:
            raise GraphError("graph has no vertices")
        self.program = program
        self.pmap = assign_partitions(graph, config.workers)
        self.workers = [Worker(w) for w in range(config.workers)]
        self.superstep = 0
        self.metrics: list[SuperstepMetrics] = []
        self.recoveries = 0
        self.checkpoints = 0
        self.last_superstep = -1
        self.termination = CONTINUE
        self._failure_fired = False
        self._last_blob: bytes | None = None
        self._last_l1: float | None = None

        N = graph.num_vertices
        if program.init is not None:
            values = [float(program.init(v, N)) if graph.alive[v] else math.nan for v in range(graph.n)]
        elif graph.values is not None:
            values = [float(x) for x in graph.values]
            missing = [v for v in range(graph.n) if graph.alive[v] and math.isnan(values[v])]
            if missing:
                raise GraphError(f"program {program.name!r} needs vertex values; vertex {missing[0]} has none")
        else:
            raise GraphError(f"program {program.name!r} needs vertex values and the graph carries none")
        self._set_graph(graph)
        self._values = values
        self._halted = [False] * graph.n
        self.aggregates = reduce_aggregators([], program.aggregators)

    # -- state -------------------------------------------------------------

    def _set_graph(self, g: Graph):
        self.graph = g
        self._degrees = g.out_degrees.tolist()
        self.pmap = assign_partitions(g, self.config.workers)
        alive = g.alive
        for w in self.workers:
            w.vertices = [v for v in self.pmap.members(w.index) if alive[v]]

    def snapshot(self) -> ckpt.EngineState:
        return ckpt.EngineState(
            superstep=self.superstep,
            graph=self.graph,
            values=np.array(self._values, dtype=np.float64),
            halted=np.array(self._halted, dtype=bool),
            inbox=MessageBatch.concat([w.inbox for w in self.workers]),
            aggregates=dict(self.aggregates),
        )

    def load(self, state: ckpt.EngineState):
        self.superstep = state.superstep
        self._set_graph(state.graph)
        self._values = state.values.tolist()
        self._halted = state.halted.tolist()
        self.aggregates = dict(state.aggregates)
        inboxes = deliver_messages([state.inbox], self.pmap, self.config.deterministic)
        for w, box in zip(self.workers, inboxes):
            w.inbox = box
            w.reset()

    def values_array(self) -> np.ndarray:
        return np.array(self._values, dtype=np.float64)

    def pending_messages(self) -> int:
        return sum(len(w.inbox) for w in self.workers)

    def active_count(self) -> int:
        h = self._halted
        return sum(1 for w in self.workers for v in w.vertices if not h[v])

    # -- superstep ---------------------------------------------------------

    def _compute_worker(self, worker: Worker, force: bool) -> tuple[int, int]:
        program = self.program
        compute = program.compute
        combiner = program.combiner
        values, halted = self._values, self._halted
        ctx = Context(self, worker)
        ctx.superstep = self.superstep
        ctx.num_vertices = self.graph.num_vertices

        if combiner is not None:
            keys, combined = combine_inbox(worker.inbox, combiner)
            inbox = {t: [c] for t, c in zip(keys, combined)}
        else:
            inbox = group_inbox(worker.inbox)
        delivered = sum(len(m) for m in inbox.values())

        computed = 0
        empty: list = []
        for v in worker.vertices:
            msgs = inbox.get(v)
            if msgs is None:
                if halted[v] and not force:
                    continue
                msgs = empty
            halted[v] = False
            ctx.vertex = v
            try:
                compute(ctx, msgs)
            except EngineError:
                raise
            except Exception as exc:
                raise VertexComputeError(self.graph.labels[v], self.superstep, exc) from exc
            computed += 1
        worker.inbox = MessageBatch.empty()
        return computed, delivered

    def execute_superstep(self, force: bool = False) -> SuperstepOutcome:
        """Run one superstep and its barrier.

        ``force`` computes every live vertex even if halted with no mail.
        """
        s = self.superstep
        t0 = time.perf_counter()
        before = self._values[:] if (force or self.config.convergence is not None) else None

        computed = delivered = 0
        for w in self.workers:
            c, d = self._compute_worker(w, force)
            computed += c
            delivered += d

        outboxes = [w.outbox(self.graph) for w in self.workers]
        sent = sum(len(b) for b in outboxes)

        plan = self.config.failure_plan
        if plan is not None and not self._failure_fired and plan[1] == s:
            self._failure_fired = True
            wall = (time.perf_counter() - t0) * 1e3
            self.metrics.append(SuperstepMetrics(s, self.active_count(), sent, delivered, wall))
            self._fail_and_recover(plan[0])
            return SuperstepOutcome(s, computed, 0, sent, delivered, wall, CONTINUE, failed_worker=plan[0])

        self.aggregates = reduce_aggregators([w.partials for w in self.workers], self.program.aggregators)
        requests = [r for w in self.workers for r in w.mutations]
        for w in self.workers:
            w.reset()
        messages = MessageBatch.concat(outboxes)
        if requests:
            messages = self._mutate(requests, messages)
        self._check_targets(messages)
        for w, box in zip(self.workers, deliver_messages([messages], self.pmap, self.config.deterministic)):
            w.inbox = box

        self.last_superstep = s
        self.superstep = s + 1
        active = self.active_count()
        changed = 0
        l1 = None
        if before is not None:
            now = self._values
            live = self.graph.alive
            m = min(len(before), len(now))
            a, b = np.array(before[:m]), np.array(now[:m])
            mask = live[:m]
            with np.errstate(invalid="ignore"):
                diff = np.abs(a[mask] - b[mask])
            changed = int(np.count_nonzero(~((a[mask] == b[mask]) | (np.isnan(a[mask]) & np.isnan(b[mask])))))
            changed += int(live[m:].sum())
            if s >= 1:
                l1 = float(np.nansum(diff))
        self._last_l1 = l1
        decision = check_termination(
            self.superstep, active == 0, len(messages), self.config.max_supersteps, l1, self.config.convergence
        )
        wall = (time.perf_counter() - t0) * 1e3
        self.metrics.append(SuperstepMetrics(s, active, sent, delivered, wall))
        log.debug("superstep %d: active=%d sent=%d decision=%s", s, active, sent, decision)
        return SuperstepOutcome(s, computed, active, sent, delivered, wall, decision, values_changed=changed)

    def _mutate(self, requests, messages: MessageBatch) -> MessageBatch:
        # issuers are unique to one worker, so a stable sort on issuer id
        # gives the same batch order for any worker count
        requests.sort(key=lambda r: r[0])
        old = self.graph
        try:
            g = apply_mutations([m for _, m in requests], old)
        except GraphError as exc:
            raise MutationError(f"superstep {self.superstep}: {exc}") from exc
        N = g.num_vertices
        grow = g.n - old.n
        self._values.extend([math.nan] * grow)
        self._halted.extend([True] * grow)
        added = {m.vertex: m for _, m in requests if m.kind == "add_vertex"}
        for v in range(g.n):
            was = v < old.n and old.alive[v]
            if g.alive[v] and not was:
                m = added[v]
                if m.value is not None:
                    self._values[v] = float(m.value)
                elif self.program.init is not None:
                    self._values[v] = float(self.program.init(v, N))
                else:
                    raise MutationError(f"add_vertex {v}: no value and program has no init")
                self._halted[v] = False
            elif was and not g.alive[v]:
                self._values[v] = math.nan
                self._halted[v] = True
        self._set_graph(g)
        if len(messages):
            t = messages.targets
            removed = (t >= 0) & (t < old.n) & old.alive[np.minimum(t, old.n - 1)] & ~g.alive[np.minimum(t, g.n - 1)]
            if removed.any():
                messages = messages.take(~removed)
        return messages

    def _check_targets(self, messages: MessageBatch):
        if not len(messages):
            return
        t = messages.targets
        g = self.graph
        bad = (t < 0) | (t >= g.n)
        bad[~bad] = ~g.alive[t[~bad]]
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise RoutingError(
                f"superstep {self.superstep}: vertex {messages.senders[i]} sent to nonexistent vertex {t[i]}"
            )

    # -- checkpoint & failure ----------------------------------------------

    def take_checkpoint(self) -> bytes:
        self._last_blob = ckpt.checkpoint(self.snapshot())
        self.checkpoints += 1
        return self._last_blob

    def _fail_and_recover(self, worker_index: int):
        w = self.workers[worker_index]
        log.info("worker %d lost at superstep %d; restoring checkpoint", worker_index, self.superstep)
        for v in w.vertices:
            self._values[v] = math.nan
        w.inbox = MessageBatch.empty()
        w.reset()
        for other in self.workers:
            other.reset()
        if self._last_blob is None:
            raise EngineError("worker failed before any checkpoint was taken")
        self.load(ckpt.restore(self._last_blob))
        self.recoveries += 1

    # -- driver ------------------------------------------------------------

    def run(self, observer: Callable[[int, np.ndarray], None] | None = None) -> RunResult:
        interval = self.config.checkpoint_interval
        last_ckpt = None
        while True:
            if interval and self.superstep % interval == 0 and last_ckpt != self.superstep:
                self.take_checkpoint()
                last_ckpt = self.superstep
            out = self.execute_superstep()
            if out.failed_worker is not None:
                continue
            if observer is not None:
                observer(out.superstep, self.values_array())
            if out.decision != CONTINUE:
                self.termination = out.decision
                break
        return self.result()

    def result(self) -> RunResult:
        alive = self.graph.alive
        return RunResult(
            values={v: self._values[v] for v in range(self.graph.n) if alive[v]},
            graph=self.graph,
            supersteps_executed=len(self.metrics),
            last_superstep=self.last_superstep,
            metrics=list(self.metrics),
            recoveries=self.recoveries,
            checkpoints=self.checkpoints,
            termination=self.termination,
            aggregates=dict(self.aggregates),
        )


def run_program(
    program: VertexProgram,
    graph: Graph,
    config: EngineConfig | None = None,
    observer: Callable[[int, np.ndarray], None] | None = None,
) -> RunResult:
    return BSPEngine(program, graph, config).run(observer)
