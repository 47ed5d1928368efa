"""Bounded in-memory sketch: a partial ordered tree plus staged edges.

All mutable engine state lives in flat int64 numpy arrays so the compiled
and pure-Python kernels can share it. Per node the engine keeps the two
core attributes (breadth-first position and parent) plus transient
bookkeeping: list heads/tails into the slot pool, an epoch mark word, and
the position-order array that doubles as the BFS work queue.

Pool layout: one slot per edge, two words (target node, next slot).
Staged edges chain per source in arrival order. Tree child lists are
rebuilt from the order array after every reduce, which makes each node's
child segment contiguous and places segments in visit order; between
rebuilds evictions may punch holes, so the pool carries n spare slots
beyond the logical budget. The logical budget (tree + staged edges) is
what the capacity check enforces.

List validity is stamp-based: a node's child or staged chain only exists
if its stamp matches the current generation, so a rebuild invalidates
every list in O(1).
"""

from __future__ import annotations

import numpy as np

from .storage import NO_PARENT

INF = 1 << 62

# scalar slots shared with the kernel backends
S_TREE = 0          # tree edges held in the pool
S_STAGED = 1        # staged edges held in the pool
S_POOL_PTR = 2      # bump allocator cursor
S_SETTLED = 3       # positions <= settled are final
S_FRONTIER = 4      # seed queue spans (settled, frontier]
S_FRONTIER2 = 5     # collection bound for the filtered scan list
S_GATE = 6          # current violation gate, INF when unset
S_GATE_MIN = 7      # lowest gate seen this pass
S_FLUSHES = 8       # capacity flushes this pass
S_EPOCH = 9         # mark generation
S_TREE_STAMP = 10   # child-list generation
S_STAGE_STAMP = 11  # staged-list generation
S_BON_VALID = 12    # order/queue arrays initialized
S_QUEUE_END = 13    # one past the last placed position
S_PEAK = 14         # peak of tree + staged
S_REDUCES = 15      # total reduce invocations
S_CAPACITY = 16     # logical edge budget
S_NACTIVE = 17      # nodes participating in placement
S_NCAND = 18        # restart candidates currently snapshotted
N_SCALARS = 19


class SketchFullError(Exception):
    """The logical edge budget is exhausted; the caller must reduce first."""


class SketchState:
    """Flat-array sketch over n nodes with a fixed logical edge budget."""

    def __init__(self, n, capacity, active=None):
        self.n = n
        self.order = np.zeros(n, np.int64)
        self.parent = np.full(n, NO_PARENT, np.int64)
        self.queue = np.zeros(n + 2, np.int64)
        self.mark = np.zeros(n, np.int64)
        self.child_head = np.full(n, -1, np.int64)
        self.child_tail = np.full(n, -1, np.int64)
        self.child_stamp = np.full(n, -1, np.int64)
        self.staged_head = np.full(n, -1, np.int64)
        self.staged_tail = np.full(n, -1, np.int64)
        self.staged_stamp = np.full(n, -1, np.int64)
        pool = capacity + n + 2  # budget + eviction holes headroom
        self.pool_node = np.zeros(pool, np.int64)
        self.pool_next = np.zeros(pool, np.int64)
        self.cand = np.zeros(n + 1, np.int64)
        self.scal = np.zeros(N_SCALARS, np.int64)
        self.scal[S_CAPACITY] = capacity
        self.scal[S_GATE] = INF
        self.scal[S_GATE_MIN] = INF
        if active is None:
            ids = np.arange(n, dtype=np.int64)
        else:
            ids = np.flatnonzero(active).astype(np.int64)
        self.scal[S_NACTIVE] = len(ids)
        self.cand[: len(ids)] = ids
        self.scal[S_NCAND] = len(ids)
        # deterministic sentinel positions for never-placed nodes
        self.order[:] = n + 1 + np.arange(n, dtype=np.int64)

    @property
    def capacity(self):
        return int(self.scal[S_CAPACITY])

    @property
    def tree_edges(self):
        return int(self.scal[S_TREE])

    @property
    def staged_edges(self):
        return int(self.scal[S_STAGED])

    @property
    def peak_edges(self):
        return int(self.scal[S_PEAK])

    def memory_breakdown(self):
        """Bytes per array, for the metrics report."""
        fields = [
            "order", "parent", "queue", "mark",
            "child_head", "child_tail", "child_stamp",
            "staged_head", "staged_tail", "staged_stamp",
            "pool_node", "pool_next", "cand", "scal",
        ]
        return {name: getattr(self, name).nbytes for name in fields}


def _alloc_slot(s):
    sc = s.scal
    slot = int(sc[S_POOL_PTR])
    if slot >= len(s.pool_node):
        raise SketchFullError("slot pool exhausted")
    sc[S_POOL_PTR] = slot + 1
    return slot


def _bump_peak(s):
    sc = s.scal
    used = sc[S_TREE] + sc[S_STAGED]
    if used > sc[S_PEAK]:
        sc[S_PEAK] = used


def insert_rightmost_child(s, u, v):
    """Append v to u's child list; the caller detaches v first if needed."""
    sc = s.scal
    if sc[S_TREE] + sc[S_STAGED] >= sc[S_CAPACITY]:
        raise SketchFullError("edge budget reached; reduce before inserting")
    slot = _alloc_slot(s)
    s.pool_node[slot] = v
    s.pool_next[slot] = -1
    stamp = sc[S_TREE_STAMP]
    if s.child_stamp[u] != stamp or s.child_head[u] < 0:
        s.child_head[u] = slot
        s.child_stamp[u] = stamp
    else:
        s.pool_next[s.child_tail[u]] = slot
    s.child_tail[u] = slot
    s.parent[v] = u
    sc[S_TREE] += 1
    _bump_peak(s)


def stage_edge(s, u, v):
    """Append (u, v) to u's staged chain, preserving arrival order."""
    sc = s.scal
    if sc[S_TREE] + sc[S_STAGED] >= sc[S_CAPACITY]:
        raise SketchFullError("edge budget reached; reduce before staging")
    slot = _alloc_slot(s)
    s.pool_node[slot] = v
    s.pool_next[slot] = -1
    stamp = sc[S_STAGE_STAMP]
    if s.staged_stamp[u] != stamp or s.staged_head[u] < 0:
        s.staged_head[u] = slot
        s.staged_stamp[u] = stamp
    else:
        s.pool_next[s.staged_tail[u]] = slot
    s.staged_tail[u] = slot
    sc[S_STAGED] += 1
    _bump_peak(s)


def _walk(s, head):
    out = []
    slot = int(head)
    while slot >= 0:
        out.append(int(s.pool_node[slot]))
        slot = int(s.pool_next[slot])
    return out


def children_of(s, u):
    if s.child_stamp[u] != s.scal[S_TREE_STAMP]:
        return []
    return _walk(s, s.child_head[u])


def child_slots_of(s, u):
    """Pool slot addresses of u's child list, for layout checks."""
    if s.child_stamp[u] != s.scal[S_TREE_STAMP]:
        return []
    out = []
    slot = int(s.child_head[u])
    while slot >= 0:
        out.append(slot)
        slot = int(s.pool_next[slot])
    return out


def staged_of(s, u):
    if s.staged_stamp[u] != s.scal[S_STAGE_STAMP]:
        return []
    return _walk(s, s.staged_head[u])


def rightmost_child(s, u):
    """Last of u's child list, or None for a leaf; constant time."""
    if s.child_stamp[u] != s.scal[S_TREE_STAMP] or s.child_head[u] < 0:
        return None
    return int(s.pool_node[s.child_tail[u]])


def evict_children(s, u, log):
    """Move u's child edges to the eviction log; attributes stay intact."""
    kids = children_of(s, u)
    if not kids:
        return 0
    kids = np.asarray(kids, np.int64)
    log.append(np.full(len(kids), u, np.int64), kids, np.arange(len(kids), dtype=np.int64))
    s.child_head[u] = -1
    s.child_tail[u] = -1
    s.scal[S_TREE] -= len(kids)
    return len(kids)


def rebuild_pool(s, lo, hi):
    """Drop every list and rebuild tree chains from queue positions [lo, hi).

    Each placed node attaches as the rightmost child of its parent; nodes
    whose parent is settled (position <= settled bound) or the dummy root
    contribute no pool edge. Because siblings occupy consecutive
    positions, the rebuilt child segments come out contiguous.
    """
    sc = s.scal
    sc[S_TREE_STAMP] += 1
    sc[S_STAGE_STAMP] += 1
    sc[S_POOL_PTR] = 0
    sc[S_TREE] = 0
    sc[S_STAGED] = 0
    settled = sc[S_SETTLED]
    stamp = sc[S_TREE_STAMP]
    for pos in range(lo, hi):
        v = int(s.queue[pos])
        p = int(s.parent[v])
        if p == NO_PARENT or s.order[p] <= settled:
            continue
        slot = int(sc[S_POOL_PTR])
        sc[S_POOL_PTR] = slot + 1
        s.pool_node[slot] = v
        s.pool_next[slot] = -1
        if s.child_stamp[p] != stamp or s.child_head[p] < 0:
            s.child_head[p] = slot
            s.child_stamp[p] = stamp
        else:
            s.pool_next[s.child_tail[p]] = slot
        s.child_tail[p] = slot
        sc[S_TREE] += 1
    _bump_peak(s)


class EEState:
    """Full in-memory ordered tree with O(1) detach/append, for the
    edge-at-a-time engine: doubly linked sibling lists under every node
    plus the dummy root at index n."""

    def __init__(self, n):
        self.n = n
        self.root = n
        self.order = np.arange(1, n + 1, dtype=np.int64)
        self.parent = np.full(n, NO_PARENT, np.int64)
        self.first_child = np.full(n + 1, -1, np.int64)
        self.last_child = np.full(n + 1, -1, np.int64)
        self.prev_sib = np.full(n, -1, np.int64)
        self.next_sib = np.full(n, -1, np.int64)
        self.scratch = np.zeros(n + 1, np.int64)
        if n:
            self.first_child[self.root] = 0
            self.last_child[self.root] = n - 1
            ids = np.arange(n, dtype=np.int64)
            self.prev_sib[:] = ids - 1
            self.next_sib[:] = ids + 1
            self.next_sib[n - 1] = -1

    def children_of(self, u):
        out = []
        c = int(self.first_child[u])
        while c >= 0:
            out.append(c)
            c = int(self.next_sib[c])
        return out
