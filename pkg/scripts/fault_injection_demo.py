"""Kill one worker mid-run and compare against the failure-free run.

Sweeps the failure superstep for a fixed checkpoint interval and reports
how many supersteps were replayed each time.
"""
import argparse

from bspgraph import EngineConfig, pagerank_program, random_graph, run_program
from bspgraph.formats import write_vertex_values


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--vertices", type=int, default=2000)
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--interval", type=int, default=5)
    args = p.parse_args()

    g = random_graph(args.vertices, 8, seed=1, sinkless=True)
    base = run_program(pagerank_program(), g, EngineConfig(workers=args.workers))
    expected = write_vertex_values(base)
    print(f"baseline: {base.supersteps_executed} supersteps")
    print("fail_at  worker  executed  replayed  identical")
    for s in range(0, 30, 3):
        w = s % args.workers
        cfg = EngineConfig(workers=args.workers, checkpoint_interval=args.interval, failure_plan=(w, s))
        r = run_program(pagerank_program(), g, cfg)
        same = write_vertex_values(r) == expected
        print(f"{s:7d}  {w:6d}  {r.supersteps_executed:8d}  {r.supersteps_executed - base.supersteps_executed:8d}  {same}")


if __name__ == "__main__":
    main()
