"""Ground-truth reference implementations and tree validators.

Everything here is deliberately simple and independent of the engine's
data structures: plain queue BFS over in-memory adjacency lists, a
streaming order-violation check, and an exhaustive longest-simple-path
bound for tiny graphs.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .storage import NO_PARENT


class InMemGraph:
    """Adjacency lists for a graph small enough to hold in memory.

    Neighbor order is the raw edge-list order, which is the tie-break every
    engine in this package uses.
    """

    def __init__(self, n, edges):
        self.n = n
        self.adj = [[] for _ in range(n)]
        self.m = 0
        for u, v in edges:
            self.adj[u].append(v)
            self.m += 1

    @classmethod
    def from_graph_file(cls, graph, meter=None):
        g = cls(graph.n, [])
        for src, dst in graph.iter_chunks(meter):
            for u, v in zip(src.tolist(), dst.tolist()):
                g.adj[u].append(v)
                g.m += 1
        return g


def reference_bfs(g: InMemGraph, restart_order=None):
    """Queue BFS marking on enqueue, restarting from restart_order.

    Returns (order, parent): order[v] is the 1-based visit position,
    parent[v] a node id or NO_PARENT for nodes visited on an empty queue.
    """
    n = g.n
    if restart_order is None:
        restart_order = range(n)
    order = np.zeros(n, np.int64)
    parent = np.full(n, NO_PARENT, np.int64)
    marked = np.zeros(n, bool)
    q = deque()
    pos = 0

    def drain():
        nonlocal pos
        while q:
            u = q.popleft()
            pos += 1
            order[u] = pos
            for v in g.adj[u]:
                if not marked[v]:
                    marked[v] = True
                    parent[v] = u
                    q.append(v)

    for s in restart_order:
        if not marked[s]:
            marked[s] = True
            q.append(s)
            drain()
    if pos != n:
        raise ValueError("restart order did not cover every node")
    return order, parent


def is_order_violation(u, v, order, parent):
    """True iff edge (u, v) proves the order is not a valid BFS traversal.

    That is: v is not u's tree child, u was visited before v, and u was
    also visited before v's parent (a root child counts as having a parent
    visited after everything).
    """
    if parent[v] == u:
        return False
    if order[u] >= order[v]:
        return False
    w = parent[v]
    return w == NO_PARENT or order[u] < order[w]


def violation_mask(src, dst, order, parent):
    """Vectorized is_order_violation over an edge chunk."""
    po = parent[dst]
    parent_late = po == NO_PARENT
    safe = np.where(parent_late, 0, po)
    return (
        (po != src)
        & (order[src] < order[dst])
        & (parent_late | (order[src] < order[safe]))
    )


class MalformedTreeError(Exception):
    """Tree arrays are structurally invalid for the given graph."""


def check_tree_shape(n, order, parent):
    """Structural checks: permutation, parent domain, parent-before-child."""
    if len(order) != n or len(parent) != n:
        raise MalformedTreeError(f"tree covers {len(order)} nodes, graph has {n}")
    if n == 0:
        return
    counts = np.bincount(order, minlength=n + 1)
    if counts[0] != 0 or not (counts[1:] == 1).all():
        raise MalformedTreeError("positions are not a permutation of 1..n")
    has_parent = parent != NO_PARENT
    p = parent[has_parent]
    if len(p) and (p.min() < 0 or p.max() >= n):
        raise MalformedTreeError("parent id out of range")
    if (p == np.flatnonzero(has_parent)).any():
        raise MalformedTreeError("node is its own parent")
    if len(p) and not (order[p] < order[has_parent]).all():
        raise MalformedTreeError("parent visited after child")


def validate_bfs_tree(graph, order, parent, meter=None, limit=64):
    """Single pass over the graph returning the violating edges.

    Raises MalformedTreeError on structural problems; an empty list means
    the tree is a valid BFS tree of the graph.
    """
    check_tree_shape(graph.n, order, parent)
    bad = []
    for src, dst in graph.iter_chunks(meter):
        mask = violation_mask(src, dst, order, parent)
        if mask.any():
            for u, v in zip(src[mask].tolist(), dst[mask].tolist()):
                bad.append((u, v))
                if len(bad) >= limit:
                    return bad
    return bad


def brute_llsp(g: InMemGraph, max_n=12):
    """Exact length (edge count) of the longest simple path.

    Dynamic program over node subsets: reach[mask, v] says a simple path
    covering exactly `mask` ends at v. Exponential in n, hence the cap.
    """
    n = g.n
    if n > max_n:
        raise ValueError(f"n={n} exceeds the exhaustive-search cap {max_n}")
    if n == 0:
        return 0
    has_edge = np.zeros((n, n), bool)
    for u in range(n):
        for v in g.adj[u]:
            if v != u:
                has_edge[u, v] = True
    size = 1 << n
    masks = np.arange(size, dtype=np.int64)
    popcount = np.zeros(size, np.int64)
    for v in range(n):
        popcount += (masks >> v) & 1
    reach = np.zeros((size, n), bool)
    for v in range(n):
        reach[1 << v, v] = True
    for k in range(1, n):
        level = popcount == k
        if not reach[level].any():
            break
        for v in range(n):
            here = masks[level & reach[:, v]]
            if not len(here):
                continue
            for u in range(n):
                if not has_edge[v, u]:
                    continue
                ext = here[(here >> u) & 1 == 0]
                if len(ext):
                    reach[ext | (1 << u), u] = True
    hit = reach.any(axis=1)
    # a path covering k nodes has k-1 edges
    return int(popcount[hit].max()) - 1


def llsp_dfs(g: InMemGraph, max_n=8):
    """Second oracle: recursive enumeration of simple paths (tiny n only)."""
    n = g.n
    if n > max_n:
        raise ValueError(f"n={n} exceeds the DFS cap {max_n}")
    best = 0
    on_path = [False] * n

    def walk(u, depth):
        nonlocal best
        best = max(best, depth)
        for v in g.adj[u]:
            if not on_path[v]:
                on_path[v] = True
                walk(v, depth + 1)
                on_path[v] = False

    for s in range(n):
        on_path[s] = True
        walk(s, 0)
        on_path[s] = False
    return best
