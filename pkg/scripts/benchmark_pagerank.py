"""Time PageRank on a random graph and print per-superstep metrics.

    python scripts/benchmark_pagerank.py --vertices 100000 --degree 10 --workers 8
"""
import argparse
import sys
import time

from bspgraph import EngineConfig, pagerank_program, random_graph, run_program
from bspgraph.formats import write_metrics


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--vertices", type=int, default=100_000)
    p.add_argument("--degree", type=float, default=10)
    p.add_argument("--workers", type=int, default=8)
    p.add_argument("--supersteps", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metrics", action="store_true", help="dump per-superstep JSON lines to stdout")
    args = p.parse_args()

    t0 = time.perf_counter()
    g = random_graph(args.vertices, args.degree, seed=args.seed)
    built = time.perf_counter() - t0
    t0 = time.perf_counter()
    r = run_program(pagerank_program(), g, EngineConfig(workers=args.workers, max_supersteps=args.supersteps))
    elapsed = time.perf_counter() - t0
    if args.metrics:
        write_metrics(r, sys.stdout)
    print(f"graph: {g.num_vertices} vertices, {g.num_edges} edges, {g.dangling_count} dangling (built in {built:.2f}s)")
    print(f"pagerank: {r.supersteps_executed} supersteps on {args.workers} workers in {elapsed:.2f}s "
          f"({elapsed / r.supersteps_executed * 1e3:.0f} ms/superstep)")
    print(f"rank mass left: {sum(r.values.values()):.6f}")


if __name__ == "__main__":
    main()
