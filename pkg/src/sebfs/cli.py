"""Command-line surface.

Subcommands: ``generate``, ``subsample``, ``run``, ``verify``, ``bench``.
Metrics are emitted as key=value lines; bench writes a tab-separated
table. Exit codes: 0 ok, 2 validation failure, 3 watchdog or time limit,
4 I/O or storage failure. The scratch directory comes from --scratch, the
SEBFS_SCRATCH environment variable, or a run-local temporary directory.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
import time

from . import kernels
from .algos import TimeLimitExceeded, WatchdogExceeded, eb_bfs, ee_bfs, ep_bfs
from .graphio import generate_er, subsample
from .metrics import RunMetrics
from .oracle import MalformedTreeError, validate_bfs_tree
from .storage import GraphFile, IoMeter, StorageError, read_tree_file, write_tree_file

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_WATCHDOG = 3
EXIT_IO = 4

DEFAULT_TIME_LIMIT = 600.0  # desk-scale stand-in for a day-long cap


def _count(text):
    """Integer CLI argument accepting scientific notation like 2e5."""
    value = float(text)
    if value < 0 or value != int(value):
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return int(value)


def execute_run(algo, graph_path, *, budget_factor=1.0, gamma=0.08, watchdog=None,
                time_limit=DEFAULT_TIME_LIMIT, scratch=None, backend=None):
    """Run one engine over a graph file; returns (tree, RunMetrics)."""
    meter = IoMeter()
    deadline = time.monotonic() + time_limit if time_limit else None
    started = time.perf_counter()
    graph = GraphFile.open(graph_path, meter)
    kern = kernels.get_backend(backend)
    if algo == "ee":
        tree, stats = ee_bfs(graph, meter=meter, watchdog=watchdog,
                             deadline=deadline, backend=kern)
    elif algo == "eb":
        tree, stats = eb_bfs(graph, budget_factor, meter=meter, watchdog=watchdog,
                             deadline=deadline, backend=kern)
    elif algo == "ep":
        if scratch is None:
            raise ValueError("the ep engine needs a scratch directory")
        tree, stats = ep_bfs(graph, budget_factor, gamma, scratch=scratch,
                             meter=meter, watchdog=watchdog, deadline=deadline,
                             backend=kern)
    else:
        raise ValueError(f"unknown algo {algo!r}")
    metrics = RunMetrics(
        algo=algo,
        wall_time=time.perf_counter() - started,
        bytes_read=meter.bytes_read,
        bytes_written=meter.bytes_written,
        peak_in_memory_edges=stats.peak_edges,
        edge_budget=int((1.0 + budget_factor) * graph.n),
        outer_iterations=stats.passes,
        work_iterations=stats.work_passes,
        imp_invocations=stats.imp_invocations,
        n=graph.n,
        m=graph.m,
        n_active=stats.n_active,
        memory=dict(stats.memory),
    )
    return tree, metrics


def _scratch_context(args):
    path = getattr(args, "scratch", None) or os.environ.get("SEBFS_SCRATCH")
    if path:
        os.makedirs(path, exist_ok=True)
        return path, None
    tmp = tempfile.TemporaryDirectory(prefix="sebfs-")
    return tmp.name, tmp


def _cmd_generate(args):
    graph = generate_er(args.n, args.m, args.seed, args.out)
    print(f"wrote {graph.path}: n={graph.n} m={graph.m} id_width={graph.id_width}")
    return EXIT_OK


def _cmd_subsample(args):
    graph = GraphFile.open(args.graph)
    out = subsample(graph, args.p, args.seed, args.out)
    print(f"wrote {out.path}: n={out.n} m={out.m} (from m={graph.m}, p={args.p})")
    return EXIT_OK


def _cmd_run(args):
    scratch, tmp = _scratch_context(args)
    try:
        tree, metrics = execute_run(
            args.algo, args.graph, budget_factor=args.k, gamma=args.gamma,
            watchdog=args.watchdog, time_limit=args.time_limit,
            scratch=scratch, backend=args.backend,
        )
    finally:
        if tmp is not None:
            tmp.cleanup()
    write_tree_file(args.out, tree.order, tree.parent)
    text = metrics.render()
    if args.metrics:
        with open(args.metrics, "w") as f:
            f.write(text)
    sys.stdout.write(text)
    if not args.no_verify:
        bad = validate_bfs_tree(GraphFile.open(args.graph), tree.order, tree.parent)
        if bad:
            print(f"validation failed: {len(bad)} violating edges, first {bad[0]}",
                  file=sys.stderr)
            return EXIT_INVALID
        print("verified: no violating edges")
    return EXIT_OK


def _cmd_verify(args):
    graph = GraphFile.open(args.graph)
    order, parent = read_tree_file(args.tree)
    try:
        bad = validate_bfs_tree(graph, order, parent)
    except MalformedTreeError as exc:
        print(f"malformed tree: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if bad:
        print(f"invalid: {len(bad)} violating edges, first {bad[0]}", file=sys.stderr)
        return EXIT_INVALID
    print("valid BFS tree")
    return EXIT_OK


_BENCH_COLUMNS = [
    "suite", "algo", "n", "m", "k", "wall_time_s", "data_transferred",
    "bytes_read", "bytes_written", "peak_in_memory_edges", "outer_iterations",
    "imp_invocations", "verified",
]


def bench_suite(name, scale):
    """Desk-scale sweep definitions; scale divides the stock sizes."""
    base = max(int(50_000 / scale), 1000)
    if name == "degree":
        return [(base, base * d, 1.0) for d in (3, 5, 8, 11)]
    if name == "nodes":
        return [(n, n * 8, 1.0) for n in (base // 4, base // 2, base, base * 2)]
    if name == "fixedm":
        m = base * 8
        return [(n, m, 1.0) for n in (base // 2, base, base * 2)]
    if name == "k":
        return [(base, base * 8, k) for k in (0.05, 0.5, 1.0, 2.0)]
    raise ValueError(f"unknown suite {name!r}")


def _cmd_bench(args):
    rows = []
    suites = [s for s in args.suites.split(",") if s]
    scratch, tmp = _scratch_context(args)
    try:
        for suite in suites:
            for idx, (n, m, k) in enumerate(bench_suite(suite, args.scale)):
                path = os.path.join(scratch, f"bench-{suite}-{idx}.graph")
                generate_er(n, m, args.seed + idx, path)
                for algo in args.algos.split(","):
                    if not algo:
                        continue
                    run_scratch = os.path.join(scratch, f"run-{suite}-{idx}-{algo}")
                    os.makedirs(run_scratch, exist_ok=True)
                    tree, met = execute_run(
                        algo, path, budget_factor=k, gamma=args.gamma,
                        time_limit=args.time_limit, scratch=run_scratch,
                        backend=args.backend,
                    )
                    ok = not validate_bfs_tree(GraphFile.open(path), tree.order, tree.parent)
                    rows.append([
                        suite, algo, n, m, k, f"{met.wall_time:.4f}",
                        met.data_transferred, met.bytes_read, met.bytes_written,
                        met.peak_in_memory_edges, met.outer_iterations,
                        met.imp_invocations, int(ok),
                    ])
    finally:
        if tmp is not None:
            tmp.cleanup()
    out = sys.stdout if not args.out else open(args.out, "w")
    try:
        print("\t".join(_BENCH_COLUMNS), file=out)
        for row in rows:
            print("\t".join(str(c) for c in row), file=out)
    finally:
        if out is not sys.stdout:
            out.close()
    if any(not row[-1] for row in rows):
        return EXIT_INVALID
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="sebfs", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a uniform random simple digraph")
    g.add_argument("--n", type=_count, required=True)
    g.add_argument("--m", type=_count, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_generate)

    s = sub.add_parser("subsample", help="keep each edge with probability p")
    s.add_argument("--graph", required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_subsample)

    r = sub.add_parser("run", help="compute a BFS tree with one engine")
    r.add_argument("--algo", choices=("ee", "eb", "ep"), required=True)
    r.add_argument("--graph", required=True)
    r.add_argument("--k", type=float, default=1.0,
                   help="edge budget factor: memory holds (1+K)n edges")
    r.add_argument("--gamma", type=float, default=0.08)
    r.add_argument("--seed", type=int, default=0,
                   help="recorded for reproducibility; the engines are deterministic")
    r.add_argument("--watchdog", type=_count, default=None,
                   help="outer-pass bound, default n")
    r.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT)
    r.add_argument("--out", required=True)
    r.add_argument("--metrics", default=None)
    r.add_argument("--scratch", default=None)
    r.add_argument("--backend", default=None, choices=(None, "python", "compiled"))
    r.add_argument("--no-verify", action="store_true")
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("verify", help="validate a tree file against a graph")
    v.add_argument("--graph", required=True)
    v.add_argument("--tree", required=True)
    v.set_defaults(func=_cmd_verify)

    b = sub.add_parser("bench", help="run the sweep suites and emit a table")
    b.add_argument("--suites", default="degree,nodes,fixedm,k",
                   help="comma-separated; empty string for an empty report")
    b.add_argument("--algos", default="eb,ep")
    b.add_argument("--scale", type=float, default=1.0)
    b.add_argument("--seed", type=int, default=7)
    b.add_argument("--gamma", type=float, default=0.08)
    b.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT)
    b.add_argument("--scratch", default=None)
    b.add_argument("--backend", default=None)
    b.add_argument("--out", default=None)
    b.set_defaults(func=_cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (WatchdogExceeded, TimeLimitExceeded) as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_WATCHDOG
    except (StorageError, OSError) as exc:
        print(f"storage error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MalformedTreeError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
