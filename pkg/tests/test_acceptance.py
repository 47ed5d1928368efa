"""Acceptance suite: every criterion as one test printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines. The heavy timing criterion (relative engine performance) generates a
20-million-edge graph and runs each engine three times; expect a couple of
minutes on the compiled backend.
"""

import filecmp
import json
import os
import statistics
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

import sebfs
from sebfs.cli import execute_run
from sebfs.graphio import generate_er, subsample
from sebfs.oracle import InMemGraph, brute_llsp, reference_bfs, validate_bfs_tree
from sebfs.storage import GraphFile, IoMeter, write_tree_file

from conftest import random_simple_digraph, write_graph

PIN_PATH = Path(__file__).parent / "data" / "io_pin.json"


@contextmanager
def criterion(num, name):
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {num} {name}: FAIL")
        raise
    print(f"\nACCEPTANCE {num} {name}: PASS")


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


@pytest.fixture(scope="module")
def validity_runs(workdir):
    """Criterion 1 grid: every run record, shared with the budget check."""
    sizes = (10, 100, 1000, 10_000)
    degrees = (0, 1, 3, 10)
    budgets = (0.05, 1.0, 2.0)
    runs = []
    started = time.perf_counter()
    seed = 0
    for n in sizes:
        for d in degrees:
            m = min(n * d, n * (n - 1))
            for rep in range(5):
                seed += 1
                path = workdir / f"val-{n}-{d}-{rep}.graph"
                graph = generate_er(n, m, seed, str(path))
                if n <= 1000:
                    tree, stats = sebfs.ee_bfs(graph)
                    bad = validate_bfs_tree(graph, tree.order, tree.parent)
                    runs.append(("ee", n, d, 1.0, len(bad), stats.peak_edges))
                for k in budgets:
                    tree, stats = sebfs.eb_bfs(graph, k)
                    bad = validate_bfs_tree(graph, tree.order, tree.parent)
                    runs.append(("eb", n, d, k, len(bad), stats.peak_edges))
                    sc = workdir / f"s-{n}-{d}-{rep}-{k}"
                    sc.mkdir()
                    tree, stats = sebfs.ep_bfs(graph, k, scratch=str(sc))
                    bad = validate_bfs_tree(graph, tree.order, tree.parent)
                    runs.append(("ep", n, d, k, len(bad), stats.peak_edges))
                path.unlink()
    return runs, time.perf_counter() - started


def test_criterion_1_validity_suite(validity_runs):
    runs, elapsed = validity_runs
    with criterion(1, "validity suite"):
        failures = [r for r in runs if r[4] != 0]
        assert failures == []
        assert len(runs) == 540  # 240 eb + 240 ep + 60 ee
        assert elapsed < 600.0, f"validity grid took {elapsed:.0f}s"


def test_criterion_2_oracle_equivalence():
    with criterion(2, "oracle equivalence"):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            n = int(rng.integers(1, 201))
            m = int(rng.integers(0, min(4 * n, n * (n - 1)) + 1))
            edges = random_simple_digraph(rng, n, m)
            src = np.array([e[0] for e in edges], np.int64)
            dst = np.array([e[1] for e in edges], np.int64)
            order = np.arange(1, n + 1, dtype=np.int64)
            parent = np.full(n, -1, np.int64)
            for _ in range(n + 1):
                o2, p2 = sebfs.im_bfs(order, parent, src, dst)
                if np.array_equal(o2, order) and np.array_equal(p2, parent):
                    break
                order, parent = o2, p2
            ref_o, ref_p = reference_bfs(InMemGraph(n, edges))
            assert np.array_equal(order, ref_o)
            assert np.array_equal(parent, ref_p)


def test_criterion_3_iteration_bound(workdir):
    with criterion(3, "iteration bound"):
        rng = np.random.default_rng(333)
        for trial in range(500):
            n = int(rng.integers(2, 13))
            m = int(rng.integers(0, n * (n - 1) + 1))
            edges = random_simple_digraph(rng, n, m)
            bound = brute_llsp(InMemGraph(n, edges))
            graph = write_graph(workdir / "bound.graph", n, edges)
            _, ee_stats = sebfs.ee_bfs(graph)
            assert ee_stats.work_passes <= bound, (trial, edges)
            _, eb_stats = sebfs.eb_bfs(graph, 1.0)
            assert eb_stats.work_passes <= bound, (trial, edges)
            sc = workdir / f"b{trial}"
            sc.mkdir()
            _, ep_stats = sebfs.ep_bfs(graph, 1.0, scratch=str(sc))
            assert ep_stats.work_passes <= bound, (trial, edges)


def test_criterion_4_memory_budget(validity_runs):
    runs, _ = validity_runs
    with criterion(4, "memory budget"):
        for algo, n, d, k, _, peak in runs:
            assert peak <= (1 + k) * n, (algo, n, d, k, peak)


def test_criterion_5_io_accounting(workdir):
    with criterion(5, "I/O accounting"):
        path = workdir / "io.graph"
        graph = generate_er(100_000, 2_000_000, 55, str(path))
        _, metrics = execute_run("ep", str(path), budget_factor=1.0,
                                 scratch=str(workdir / "io-scratch"))
        payload = graph.payload_bytes
        assert metrics.bytes_read >= payload  # the mandatory full scan
        assert 2 * payload <= metrics.data_transferred <= 20 * payload
        if PIN_PATH.exists():
            pin = json.loads(PIN_PATH.read_text())["data_transferred"]
            assert abs(metrics.data_transferred - pin) <= 0.10 * pin
        else:  # pragma: no cover - first green run records the band
            PIN_PATH.parent.mkdir(exist_ok=True)
            PIN_PATH.write_text(json.dumps(
                {"data_transferred": metrics.data_transferred,
                 "payload_bytes": payload}, indent=2))


def test_criterion_6_relative_performance(workdir):
    with criterion(6, "relative performance"):
        started = time.perf_counter()
        path = workdir / "perf.graph"
        generate_er(1_000_000, 20_000_000, 7, str(path))
        medians = {}
        for algo in ("ep", "eb"):
            times = []
            for rep in range(3):
                sc = workdir / f"perf-{algo}-{rep}"
                sc.mkdir()
                t0 = time.perf_counter()
                tree, _ = execute_run(algo, str(path), budget_factor=1.0,
                                      scratch=str(sc), time_limit=1500.0)
                times.append(time.perf_counter() - t0)
            medians[algo] = statistics.median(times)
        print(f"\nmedian wall time: ep={medians['ep']:.1f}s eb={medians['eb']:.1f}s "
              f"ratio={medians['ep'] / medians['eb']:.3f}")
        assert medians["ep"] <= 0.8 * medians["eb"]
        assert time.perf_counter() - started < 1800.0
        path.unlink()


def test_criterion_7_subsampler_statistics(workdir):
    with criterion(7, "subsampler statistics"):
        path = workdir / "sub.graph"
        graph = generate_er(100_000, 1_000_000, 99, str(path))
        out = subsample(graph, 0.2, 4242, str(workdir / "sub-out.graph"))
        sigma = (1_000_000 * 0.2 * 0.8) ** 0.5
        assert abs(out.m - 200_000) <= 3 * sigma


def test_criterion_8_determinism(workdir):
    with criterion(8, "determinism"):
        path = workdir / "det.graph"
        generate_er(10_000, 50_000, 13, str(path))
        for algo in ("ee", "eb", "ep"):
            outs = []
            for rep in range(3):
                sc = workdir / f"det-{algo}-{rep}"
                sc.mkdir()
                tree, _ = execute_run(algo, str(path), budget_factor=1.0,
                                      gamma=0.08, scratch=str(sc))
                out = workdir / f"det-{algo}-{rep}.tree"
                write_tree_file(str(out), tree.order, tree.parent)
                outs.append(out)
            assert filecmp.cmp(outs[0], outs[1], shallow=False)
            assert filecmp.cmp(outs[0], outs[2], shallow=False)
