"""Graph input: degree scan, disk partitioning, k-way merge, generators.

The partitioner cuts the raw edge list into consecutive slices that each
fit the in-memory budget, sorts every slice by source (stable, so a
source's edges keep their arrival order) and writes it back out. The
merge layer re-delivers the union grouped by source in ascending order,
reading each partition sequentially exactly once.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import kernels
from .storage import (
    DEFAULT_CHUNK_EDGES,
    GraphFile,
    GraphWriter,
    RecordFile,
    RecordWriter,
    StorageError,
)

_NO_CUT = 1 << 62


@dataclass
class DegreeTable:
    """Per-node in/out degree counts; transient setup data."""

    indeg: np.ndarray
    outdeg: np.ndarray


def compute_degrees(graph, meter=None):
    """One sequential pass; indeg[v] and outdeg[u] count (u, v) records."""
    indeg = np.zeros(graph.n, np.int64)
    outdeg = np.zeros(graph.n, np.int64)
    for src, dst in graph.iter_chunks(meter, raw=True):
        outdeg += np.bincount(src, minlength=graph.n)
        indeg += np.bincount(dst, minlength=graph.n)
    return DegreeTable(indeg, outdeg)


@dataclass
class Partition:
    """One source-sorted slice of the edge list."""

    index: int
    file: RecordFile

    @property
    def edges(self):
        return self.file.edges


def partition_capacity(n, budget_factor):
    """Edges per partition under the (1 + K) * n budget; floor of the product."""
    return int((1.0 + budget_factor) * n)


def partition_graph(graph, budget_factor, scratch, meter=None, budget=None,
                    backend=None, with_degrees=False):
    """Slice the edge list into source-sorted partitions (the scan phase).

    Returns ceil(m / capacity) partitions; their concatenation covers the
    edge multiset exactly once. `budget` optionally caps the in-memory
    sort; it must admit one full partition. with_degrees=True counts
    degrees on the same read and returns (partitions, DegreeTable).
    """
    kern = backend or kernels.backend
    cap = partition_capacity(graph.n, budget_factor)
    if graph.m > 0 and cap < 1:
        raise ValueError("budget admits no edges per partition")
    if budget is not None and cap > budget:
        raise ValueError(
            f"partition capacity {cap} exceeds in-memory sort budget {budget}"
        )
    parts = []
    pending_src = []
    pending_dst = []
    pending = 0
    if with_degrees:
        indeg = np.zeros(graph.n, np.int64)
        outdeg = np.zeros(graph.n, np.int64)

    def flush():
        nonlocal pending, pending_src, pending_dst
        src = np.concatenate(pending_src)
        dst = np.concatenate(pending_dst)
        src, dst = kern.sort_pairs_by_source(src, dst, graph.n)
        idx = len(parts)
        path = os.path.join(scratch, f"part{idx:05d}.edges")
        w = RecordWriter(path, graph.id_width, meter)
        w.write(src, dst)
        parts.append(Partition(idx, w.close()))
        pending_src, pending_dst, pending = [], [], 0

    for src, dst in graph.iter_chunks(meter, raw=True):
        if with_degrees:
            outdeg += np.bincount(src, minlength=graph.n)
            indeg += np.bincount(dst, minlength=graph.n)
        while len(src):
            take = min(cap - pending, len(src))
            pending_src.append(src[:take])
            pending_dst.append(dst[:take])
            pending += take
            src, dst = src[take:], dst[take:]
            if pending == cap:
                flush()
    if pending:
        flush()
    if with_degrees:
        return parts, DegreeTable(indeg, outdeg)
    return parts


class _Cursor:
    """Buffered sequential reader over one partition."""

    def __init__(self, part, meter, chunk_edges):
        self.chunks = part.file.iter_chunks(meter, chunk_edges, raw=True)
        self.src = np.empty(0, np.int64)
        self.dst = self.src
        self.pos = 0
        self.eof = False

    @property
    def remaining(self):
        return len(self.src) - self.pos

    def refill(self, at_least=1):
        while not self.eof and self.remaining < at_least:
            try:
                src, dst = next(self.chunks)
            except StopIteration:
                self.eof = True
                break
            self.src = np.concatenate((self.src[self.pos:], src))
            self.dst = np.concatenate((self.dst[self.pos:], dst))
            self.pos = 0

    def take_below(self, cut):
        if cut == _NO_CUT:
            hi = len(self.src)
        else:
            hi = self.pos + int(
                np.searchsorted(self.src[self.pos:], cut, side="left")
            )
        src = self.src[self.pos:hi]
        dst = self.dst[self.pos:hi]
        self.pos = hi
        return src, dst


def merge_partitions(parts, meter=None, chunk_edges=DEFAULT_CHUNK_EDGES, backend=None):
    """Stream the partitions merged by (source, partition index, arrival).

    Yields (src, dst) chunks; sources ascend across the whole stream and
    every record appears exactly once. Concatenating the per-partition
    slices in index order and stable-sorting by source yields exactly the
    (source, partition, arrival) tie order.
    """
    kern = backend or kernels.backend
    if not parts:
        return
    cursors = [_Cursor(p, meter, chunk_edges) for p in parts]
    for c in cursors:
        c.refill()
    while True:
        live = [c for c in cursors if c.remaining or not c.eof]
        if not live:
            return
        need = chunk_edges
        while True:
            cut = _NO_CUT
            for c in live:
                if not c.eof and c.remaining < need:
                    c.refill(need)
            for c in live:
                if not c.eof and c.remaining:
                    cut = min(cut, int(c.src[-1]))
            if any(c.remaining for c in live):
                got = [c.take_below(cut) for c in live]
                if any(len(s) for s, _ in got):
                    break
                need *= 2  # one source spans an entire buffer; widen it
            else:
                got = []
                break
        if not got:
            continue
        src = np.concatenate([s for s, _ in got])
        dst = np.concatenate([d for _, d in got])
        hi = int(src.max()) + 1 if len(src) else 1
        yield kern.sort_pairs_by_source(src, dst, hi)


def iter_adjacency(parts, degrees, meter=None, chunk_edges=DEFAULT_CHUNK_EDGES):
    """Per-source view of the merged stream.

    Yields (u, neighbors, sink_targets) with sources strictly ascending:
    neighbors are the ordered targets that still have outgoing edges,
    sink_targets the ordered targets whose out-degree is zero.
    """
    outdeg = degrees.outdeg
    held_u = -1
    held_dst = []

    def emit(u, dst):
        dst = np.concatenate(dst) if len(dst) > 1 else dst[0]
        sink = outdeg[dst] == 0
        return u, dst[~sink], dst[sink]

    for src, dst in merge_partitions(parts, meter, chunk_edges):
        bounds = np.flatnonzero(np.diff(src)) + 1
        starts = np.concatenate(([0], bounds))
        ends = np.concatenate((bounds, [len(src)]))
        for s, e in zip(starts.tolist(), ends.tolist()):
            u = int(src[s])
            if u == held_u:
                held_dst.append(dst[s:e])
                continue
            if held_u >= 0:
                yield emit(held_u, held_dst)
            held_u = u
            held_dst = [dst[s:e]]
    if held_u >= 0:
        yield emit(held_u, held_dst)


def generate_er(n, m, seed, path, meter=None):
    """Uniform random simple digraph with exactly m distinct edges.

    Rejection sampling over ordered pairs, deterministic for a fixed seed.
    The duplicate filter keeps all accepted keys in memory, so this is a
    desk-scale generator (documented cap: m of a few 1e7).
    """
    if n < 0 or m < 0:
        raise ValueError("n and m must be non-negative")
    if m > n * (n - 1):
        raise ValueError(f"m={m} exceeds simple-digraph capacity n(n-1)={n * (n - 1)}")
    rng = np.random.default_rng(seed)
    seen = np.empty(0, np.uint64)
    out_src = []
    out_dst = []
    got = 0
    while got < m:
        want = m - got
        draw = max(1024, int(want * 1.2))
        u = rng.integers(0, n, size=draw, dtype=np.int64)
        v = rng.integers(0, n, size=draw, dtype=np.int64)
        ok = u != v
        u, v = u[ok], v[ok]
        # n <= 2^32, so u * n + v is collision-free in 64 bits
        key = u.astype(np.uint64) * np.uint64(n) + v.astype(np.uint64)
        fresh_idx = np.sort(np.unique(key, return_index=True)[1])  # first hits, in draw order
        key, u, v = key[fresh_idx], u[fresh_idx], v[fresh_idx]
        new = ~np.isin(key, seen, assume_unique=False)
        key, u, v = key[new], u[new], v[new]
        if len(key) > want:
            key, u, v = key[:want], u[:want], v[:want]
        if len(key):
            seen = np.sort(np.concatenate((seen, key)))
            out_src.append(u)
            out_dst.append(v)
            got += len(key)
    with GraphWriter(path, n, meter=meter) as w:
        for src, dst in zip(out_src, out_dst):
            w.write(src, dst)
    return GraphFile.open(path)


def subsample(graph, p, seed, path, meter=None):
    """Keep each edge independently with probability p; one sequential pass."""
    if not (0.0 < p <= 1.0):
        raise ValueError("p must be in (0, 1]")
    rng = np.random.default_rng(seed)
    with GraphWriter(path, graph.n, graph.id_width, meter) as w:
        for src, dst in graph.iter_chunks(meter):
            keep = rng.random(len(src)) < p
            w.write(src[keep], dst[keep])
    return GraphFile.open(path)
