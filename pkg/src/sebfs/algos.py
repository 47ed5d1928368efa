"""The three disk-resident BFS engines.

All of them compute an ordered spanning tree of the input graph, rooted
at a dummy node, such that no edge witnesses an ordering violation
(:func:`sebfs.oracle.is_order_violation`). They differ in how much of the
graph they are willing to look at per restructuring step:

``ee``  edge-at-a-time: rescans the whole graph, re-rooting one violating
        edge at a time and recomputing every position after each move.
``eb``  edge batches: consumes the graph in budget-sized batches, handing
        each to the in-memory restructuring BFS.
``ep``  pruned stream: partitions the graph once, drops zero-in/out-degree
        nodes, then iterates over a shrinking working edge list gated by
        position thresholds, evicting settled tree regions to disk.

Engine state is mutated by the kernel backend selected in
:mod:`sebfs.kernels`; this module owns phase sequencing, disk lists, and
threshold bookkeeping.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .graphio import merge_partitions, partition_capacity, partition_graph
from .sketch import (
    INF,
    S_BON_VALID,
    S_FLUSHES,
    S_FRONTIER,
    S_FRONTIER2,
    S_GATE,
    S_GATE_MIN,
    S_NACTIVE,
    S_QUEUE_END,
    S_REDUCES,
    S_SETTLED,
    S_STAGED,
    EEState,
    SketchState,
    rebuild_pool,
)
from .storage import NO_PARENT, EvictLog, IoMeter, RecordWriter


class WatchdogExceeded(Exception):
    """More outer passes than the configured bound; a termination
    assumption is broken."""


class TimeLimitExceeded(Exception):
    """Wall-clock budget for the run expired."""


@dataclass
class BfsTree:
    """Final output: breadth-first positions 1..n and parent ids (-1 for
    children of the dummy root)."""

    order: np.ndarray
    parent: np.ndarray

    @property
    def n(self):
        return len(self.order)


@dataclass
class Thresholds:
    """Gating state of the pruned-stream main loop, kept for reporting."""

    settled: int = 0
    frontier: int = 0
    frontier2: int = 0
    gate_min: int = INF
    flushes: int = 0
    rebuild_mark: int = 1
    rebuild_count: int = 0
    gate_history: list = field(default_factory=list)


@dataclass
class AlgoStats:
    passes: int = 0
    work_passes: int = 0
    imp_invocations: int = 0
    peak_edges: int = 0
    n_active: int = 0
    restructures: int = 0
    work_list_sizes: list = field(default_factory=list)
    memory: dict = field(default_factory=dict)


class _Guard:
    """Watchdog and deadline checks shared by the engines."""

    def __init__(self, watchdog, deadline):
        self.watchdog = watchdog
        self.deadline = deadline
        self.passes = 0

    def next_pass(self):
        self.passes += 1
        if self.watchdog is not None and self.passes > self.watchdog:
            raise WatchdogExceeded(
                f"exceeded {self.watchdog} outer passes without terminating"
            )
        self.tick()

    def tick(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise TimeLimitExceeded("run exceeded its time limit")


def tree_of(state):
    return BfsTree(state.order.copy(), state.parent.copy())


def ee_bfs(graph, *, meter=None, watchdog=None, deadline=None, backend=None):
    """Edge-at-a-time engine; memory holds only the spanning tree."""
    kern = backend or kernels.backend
    guard = _Guard(watchdog if watchdog is not None else max(graph.n, 1), deadline)
    state = EEState(graph.n)
    stats = AlgoStats(peak_edges=graph.n, n_active=graph.n)
    while True:
        guard.next_pass()
        stats.passes += 1
        changes = 0
        for src, dst in graph.iter_chunks(meter, raw=True):
            changes += kern.ee_scan_batch(state, src, dst)
            guard.tick()
        if changes == 0:
            break
        stats.restructures += changes
        stats.work_passes += 1
    return BfsTree(state.order.copy(), state.parent.copy()), stats


def _iter_batches(chunks, batch_edges):
    held_s, held_d, have = [], [], 0
    for src, dst in chunks:
        while len(src):
            take = min(batch_edges - have, len(src))
            held_s.append(src[:take])
            held_d.append(dst[:take])
            have += take
            src, dst = src[take:], dst[take:]
            if have == batch_edges:
                yield np.concatenate(held_s), np.concatenate(held_d)
                held_s, held_d, have = [], [], 0
    if have:
        yield np.concatenate(held_s), np.concatenate(held_d)


def eb_bfs(graph, budget_factor=1.0, *, meter=None, watchdog=None, deadline=None,
           backend=None):
    """Batch engine: restructure after every budget_factor * n edges."""
    if budget_factor <= 0:
        raise ValueError("budget factor must be positive")
    kern = backend or kernels.backend
    n = graph.n
    guard = _Guard(watchdog if watchdog is not None else max(n, 1), deadline)
    batch = max(1, int(budget_factor * n))
    state = SketchState(n, n + batch)
    kern.init_full_star(state)
    stats = AlgoStats(n_active=n)
    while True:
        guard.next_pass()
        stats.passes += 1
        changed = False
        for src, dst in _iter_batches(graph.iter_chunks(meter, raw=True), batch):
            before = state.parent.copy()
            kern.stage_batch_raw(state, src, dst)
            kern.reduce_sketch(state)
            stats.imp_invocations += 1
            if not changed and not np.array_equal(before, state.parent):
                changed = True
            guard.tick()
        if not changed:
            break
        stats.work_passes += 1
    stats.peak_edges = state.peak_edges
    stats.memory = state.memory_breakdown()
    return tree_of(state), stats


def im_bfs(order, parent, src, dst, backend=None):
    """In-memory restructuring BFS: the BFS tree of (current tree + batch).

    Tie-break: a visited node enqueues its tree children left to right,
    then its batch edges in list order; root children restart in position
    order when still unmarked. Pure function over (order, parent).
    """
    kern = backend or kernels.backend
    n = len(order)
    src = np.asarray(src, np.int64)
    dst = np.asarray(dst, np.int64)
    state = SketchState(n, n + len(src) + 1)
    state.order[:] = order
    state.parent[:] = parent
    if n:
        state.queue[np.asarray(order, np.int64)] = np.arange(n, dtype=np.int64)
    state.scal[S_QUEUE_END] = n + 1
    state.scal[S_BON_VALID] = 1
    rebuild_pool(state, 1, n + 1)
    kern.stage_batch_raw(state, src, dst)
    kern.reduce_sketch(state)
    return state.order.copy(), state.parent.copy()


def collect_for_next(u, v, order, frontier, frontier2):
    """Filter rule for the replacement working list: keep an edge only if
    both endpoints sit strictly beyond the collection bounds."""
    return order[u] > frontier and order[v] > frontier2


@dataclass
class EdgeLists:
    """Disk lists surrounding the pruned-stream main loop."""

    work: object = None          # active scan list
    next_writer: object = None   # open collector, or None (absent)
    source_edges: object = None  # edges out of zero-in-degree nodes
    sink_edges: object = None    # edges into zero-out-degree nodes
    evict_log: object = None


def rotate_work_list(lists, thresh, n, m, gamma, scratch, id_width, meter):
    """End-of-pass list maintenance: seal an open collector into the new
    working list, then open a fresh collector if the frontier moved far
    enough since the last rebuild (strict inequality)."""
    if lists.next_writer is not None:
        new = lists.next_writer.close()
        lists.work.delete()
        lists.work = new
        lists.next_writer = None
    if n > 0:
        gap = float(thresh.frontier - thresh.rebuild_mark)
        bound = n * gamma * (m / n) ** thresh.rebuild_count
        if gap > bound:
            path = os.path.join(scratch, f"work{thresh.rebuild_count + 1:03d}.edges")
            lists.next_writer = RecordWriter(path, id_width, meter)
            thresh.rebuild_mark = thresh.frontier
            thresh.rebuild_count += 1


def finalize_tree(state, degrees, active):
    """Assemble the full-node-set tree: sinks and isolated nodes first in
    id order, the active placement shifted after them, then sources last
    in id order; every pruned node hangs off the dummy root."""
    n = len(active)
    sinks = degrees.outdeg == 0
    sources = (degrees.indeg == 0) & (degrees.outdeg > 0)
    order = np.empty(n, np.int64)
    parent = np.full(n, NO_PARENT, np.int64)
    sink_ids = np.flatnonzero(sinks)
    source_ids = np.flatnonzero(sources)
    order[sink_ids] = 1 + np.arange(len(sink_ids), dtype=np.int64)
    if active.any():
        order[active] = state.order[active] + len(sink_ids)
        parent[active] = state.parent[active]
    order[source_ids] = n - len(source_ids) + 1 + np.arange(len(source_ids), dtype=np.int64)
    return BfsTree(order, parent)


def ep_bfs(graph, budget_factor=1.0, gamma=0.08, *, scratch, meter=None,
           watchdog=None, deadline=None, backend=None):
    """Pruned-stream engine.

    Phases: partition the raw edge list; one merged setup scan routing
    sink/source edges to their own lists while staging the rest under the
    budget; an ordering reduce; then main passes over the working list
    with threshold gating, budget flushes, settled-region eviction, and
    periodic working-list rebuilds.
    """
    if budget_factor <= 0:
        raise ValueError("budget factor must be positive")
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must be in (0, 1)")
    kern = backend or kernels.backend
    meter = meter if meter is not None else IoMeter()
    n, m = graph.n, graph.m
    guard = _Guard(watchdog if watchdog is not None else max(n, 1), deadline)

    parts, degrees = partition_graph(graph, budget_factor, scratch, meter,
                                     backend=kern, with_degrees=True)
    active = (degrees.indeg > 0) & (degrees.outdeg > 0)
    n_active = int(active.sum())
    capacity = max(partition_capacity(n, budget_factor), 1)
    state = SketchState(n, capacity, active=active)
    stats = AlgoStats(n_active=n_active)

    lists = EdgeLists(evict_log=EvictLog(os.path.join(scratch, "evicted.log"), meter))
    work_w = RecordWriter(os.path.join(scratch, "work000.edges"), graph.id_width, meter)
    source_w = RecordWriter(os.path.join(scratch, "source.edges"), graph.id_width, meter)
    sink_w = RecordWriter(os.path.join(scratch, "sink.edges"), graph.id_width, meter)
    for src, dst in merge_partitions(parts, meter, backend=kern):
        to_sink = degrees.outdeg[dst] == 0
        if to_sink.any():
            sink_w.write(src[to_sink], dst[to_sink])
            keep = ~to_sink
            src, dst = src[keep], dst[keep]
        from_source = degrees.indeg[src] == 0
        if from_source.any():
            source_w.write(src[from_source], dst[from_source])
            keep = ~from_source
            src, dst = src[keep], dst[keep]
        work_w.write(src, dst)
        kern.setup_stage_batch(state, src, dst)
        guard.tick()
    lists.work = work_w.close()
    lists.source_edges = source_w.close()
    lists.sink_edges = sink_w.close()
    for p in parts:
        p.file.delete()
    if n_active and (state.scal[S_STAGED] > 0 or not state.scal[S_BON_VALID]):
        kern.reduce_sketch(state)

    thresh = Thresholds()
    evict_p = np.zeros(n_active + 1, np.int64)
    evict_c = np.zeros(n_active + 1, np.int64)
    evict_r = np.zeros(n_active + 1, np.int64)
    sc = state.scal
    while sc[S_SETTLED] < n_active:
        guard.next_pass()
        stats.passes += 1
        stats.work_list_sizes.append(lists.work.edges)
        sc[S_FLUSHES] = 0
        sc[S_GATE] = INF
        sc[S_GATE_MIN] = INF
        collecting = lists.next_writer is not None
        for src, dst in lists.work.iter_chunks(meter, raw=True):
            eflags = np.zeros(len(src), np.uint8)
            kern.scan_batch(state, src, dst, 1 if collecting else 0, eflags)
            if collecting:
                keep = eflags.view(bool)
                lists.next_writer.write(src[keep], dst[keep])
            guard.tick()
        kern.finish_pass(state)
        if sc[S_FLUSHES] == 0 and sc[S_GATE_MIN] == INF:
            # full pass with nothing staged: the tree is at its fixpoint
            break
        stats.work_passes += 1
        thresh.flushes = int(sc[S_FLUSHES])
        thresh.gate_min = int(sc[S_GATE_MIN])
        thresh.gate_history.append(thresh.gate_min)
        alpha = int(sc[S_SETTLED])
        sc[S_SETTLED] = kern.find_child_bound(state, alpha, int(sc[S_GATE_MIN]) - 1)
        sc[S_FRONTIER] = max(
            kern.find_child_bound(state, alpha, int(sc[S_SETTLED]) + 1), sc[S_SETTLED]
        )
        sc[S_FRONTIER2] = max(
            kern.find_child_bound(state, alpha, int(sc[S_FRONTIER]) + 1), sc[S_FRONTIER]
        )
        thresh.settled = int(sc[S_SETTLED])
        thresh.frontier = int(sc[S_FRONTIER])
        thresh.frontier2 = int(sc[S_FRONTIER2])
        count = kern.evict_range(state, alpha, thresh.settled, evict_p, evict_c, evict_r)
        lists.evict_log.append(evict_p[:count], evict_c[:count], evict_r[:count])
        rotate_work_list(lists, thresh, n, m, gamma, scratch, graph.id_width, meter)
    if lists.next_writer is not None:
        lists.next_writer.close()
        lists.next_writer = None
    lists.evict_log.close()

    stats.imp_invocations = int(sc[S_REDUCES])
    stats.peak_edges = state.peak_edges
    stats.memory = state.memory_breakdown()
    tree = finalize_tree(state, degrees, active)
    return tree, stats
