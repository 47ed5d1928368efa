"""Pure-Python kernel backend.

Same contract as the compiled backend in ``_core.pyx``: every function
mutates a :class:`~sebfs.sketch.SketchState` (or EEState) in place. This
version favors clarity; the compiled twin mirrors it loop for loop.
"""

from __future__ import annotations

from . import sketch
from .sketch import (
    INF,
    S_BON_VALID,
    S_CAPACITY,
    S_EPOCH,
    S_FLUSHES,
    S_FRONTIER,
    S_FRONTIER2,
    S_GATE,
    S_GATE_MIN,
    S_NACTIVE,
    S_NCAND,
    S_QUEUE_END,
    S_REDUCES,
    S_SETTLED,
    S_STAGE_STAMP,
    S_STAGED,
    S_TREE,
    S_TREE_STAMP,
)
from .storage import NO_PARENT

BACKEND_NAME = "python"


def sort_pairs_by_source(src, dst, n):
    """Stable sort of an edge chunk by source id (counting-sort semantics:
    sources ascend, each source keeps its arrival order)."""
    import numpy as np

    order = np.argsort(src, kind="stable")
    return np.ascontiguousarray(src[order]), np.ascontiguousarray(dst[order])


def _drain(s, head, tail, epoch):
    """BFS off the queue: assign positions at the head, append unmarked
    targets at the tail (tree children first, then staged edges)."""
    sc = s.scal
    order, parent, queue, mark = s.order, s.parent, s.queue, s.mark
    pool_node, pool_next = s.pool_node, s.pool_next
    tree_stamp = sc[S_TREE_STAMP]
    stage_stamp = sc[S_STAGE_STAMP]
    while head < tail:
        v = int(queue[head])
        order[v] = head
        head += 1
        if s.child_stamp[v] == tree_stamp:
            slot = int(s.child_head[v])
            while slot >= 0:
                c = int(pool_node[slot])
                if mark[c] != epoch:
                    mark[c] = epoch
                    parent[c] = v
                    queue[tail] = c
                    tail += 1
                slot = int(pool_next[slot])
        if s.staged_stamp[v] == stage_stamp:
            slot = int(s.staged_head[v])
            while slot >= 0:
                c = int(pool_node[slot])
                if mark[c] != epoch:
                    mark[c] = epoch
                    parent[c] = v
                    queue[tail] = c
                    tail += 1
                slot = int(pool_next[slot])
    return head


def reduce_sketch(s):
    """One in-memory reduce: re-derive positions from the seed window,
    restart stranded root children in order, then rebuild the pool."""
    sc = s.scal
    sc[S_REDUCES] += 1
    n_active = int(sc[S_NACTIVE])
    settled = int(sc[S_SETTLED])
    if n_active == 0:
        sc[S_QUEUE_END] = 1
        sc[S_BON_VALID] = 1
        sketch.rebuild_pool(s, 1, 1)
        return
    order, parent, queue, mark = s.order, s.parent, s.queue, s.mark
    if sc[S_BON_VALID]:
        # snapshot restart candidates before the queue region is rewritten
        ncand = 0
        for pos in range(settled + 1, int(sc[S_QUEUE_END])):
            u = int(queue[pos])
            if parent[u] == NO_PARENT:
                s.cand[ncand] = u
                ncand += 1
        sc[S_NCAND] = ncand
    sc[S_EPOCH] += 1
    epoch = int(sc[S_EPOCH])
    head = settled + 1
    tail = max(int(sc[S_FRONTIER]), settled) + 1
    for pos in range(head, tail):
        mark[queue[pos]] = epoch
    head = _drain(s, head, tail, epoch)
    for idx in range(int(sc[S_NCAND])):
        u = int(s.cand[idx])
        if mark[u] == epoch:
            continue
        mark[u] = epoch
        parent[u] = NO_PARENT
        queue[head] = u
        head = _drain(s, head, head + 1, epoch)
    sc[S_QUEUE_END] = head
    sc[S_BON_VALID] = 1
    sketch.rebuild_pool(s, settled + 1, head)


def stage_batch_raw(s, src, dst):
    """Stage a batch without capacity flushing (the caller sized it)."""
    for j in range(len(src)):
        sketch.stage_edge(s, int(src[j]), int(dst[j]))


def setup_stage_batch(s, src, dst):
    """Stage edges during the setup scan, reducing whenever the budget fills."""
    sc = s.scal
    flushes = 0
    for j in range(len(src)):
        sketch.stage_edge(s, int(src[j]), int(dst[j]))
        if sc[S_TREE] + sc[S_STAGED] >= sc[S_CAPACITY]:
            reduce_sketch(s)
            flushes += 1
    sc[S_FLUSHES] += flushes
    return flushes


def scan_batch(s, src, dst, enlarge_open, eflags):
    """Main-pass edge scan: skip settled regions, collect the filtered
    list, stage budget-gated and violating edges, flush on a full budget."""
    sc = s.scal
    order, parent = s.order, s.parent
    settled = int(sc[S_SETTLED])
    frontier = int(sc[S_FRONTIER])
    frontier2 = int(sc[S_FRONTIER2])
    flushes = 0
    for j in range(len(src)):
        u = int(src[j])
        bu = int(order[u])
        if bu <= settled:
            continue
        v = int(dst[j])
        bv = int(order[v])
        if bv <= frontier:
            continue
        if enlarge_open and bu > frontier and bv > frontier2:
            eflags[j] = 1
        p = int(parent[v])
        if p == u:
            continue
        gate = int(sc[S_GATE])
        if gate <= bu:
            if bv < gate:
                continue
        else:
            pb = INF if p == NO_PARENT else int(order[p])
            if bu < bv and bu < pb:
                sc[S_GATE] = bu
                if bu < sc[S_GATE_MIN]:
                    sc[S_GATE_MIN] = bu
            else:
                continue
        sketch.stage_edge(s, u, v)
        if sc[S_TREE] + sc[S_STAGED] >= sc[S_CAPACITY]:
            reduce_sketch(s)
            flushes += 1
            sc[S_GATE] = INF
    sc[S_FLUSHES] += flushes
    return flushes


def finish_pass(s):
    """End-of-pass reduce, skipped when nothing is staged."""
    if s.scal[S_STAGED] > 0:
        reduce_sketch(s)
        return 1
    return 0


def find_child_bound(s, alpha, beta):
    """Scan positions beta..alpha+1 for the first non-leaf; return its
    rightmost child's position, else beta. Beta is clamped to the placed
    range."""
    sc = s.scal
    n_active = int(sc[S_NACTIVE])
    beta = min(int(beta), n_active)
    if beta < alpha:
        beta = int(alpha)
    stamp = sc[S_TREE_STAMP]
    for pos in range(beta, int(alpha), -1):
        u = int(s.queue[pos])
        if s.child_stamp[u] == stamp and s.child_head[u] >= 0:
            return int(s.order[s.pool_node[s.child_tail[u]]])
    return beta


def evict_range(s, alpha, settled, out_parent, out_child, out_rank):
    """Detach child edges of every node placed in (alpha, settled] and
    emit (parent, child, rank) triples; returns the triple count."""
    sc = s.scal
    stamp = sc[S_TREE_STAMP]
    count = 0
    for pos in range(int(alpha) + 1, int(settled) + 1):
        u = int(s.queue[pos])
        if s.child_stamp[u] != stamp:
            continue
        slot = int(s.child_head[u])
        rank = 0
        while slot >= 0:
            out_parent[count] = u
            out_child[count] = s.pool_node[slot]
            out_rank[count] = rank
            count += 1
            rank += 1
            slot = int(s.pool_next[slot])
        if rank:
            s.child_head[u] = -1
            s.child_tail[u] = -1
            sc[S_TREE] -= rank
    return count


def init_full_star(s):
    """Initial placement for the naive engines: every node a root child
    in id order."""
    sc = s.scal
    n = s.n
    for v in range(n):
        s.order[v] = v + 1
        s.parent[v] = NO_PARENT
        s.queue[v + 1] = v
    sc[S_QUEUE_END] = n + 1
    sc[S_BON_VALID] = 1
    sc[S_SETTLED] = 0
    sc[S_FRONTIER] = 0
    sketch.rebuild_pool(s, 1, n + 1)


def ee_scan_batch(e, src, dst):
    """Edge-at-a-time scan: re-root each violating edge's target as the
    source's rightmost child and recompute every position; returns the
    number of restructures."""
    order, parent = e.order, e.parent
    restructures = 0
    for j in range(len(src)):
        u = int(src[j])
        v = int(dst[j])
        if parent[v] == u:
            continue
        bu = int(order[u])
        if bu >= order[v]:
            continue
        p = int(parent[v])
        if p != NO_PARENT and order[p] <= bu:
            continue
        _ee_detach(e, v, p)
        _ee_append(e, u, v)
        parent[v] = u
        _ee_reorder(e)
        restructures += 1
    return restructures


def _ee_detach(e, v, p):
    owner = e.root if p == NO_PARENT else p
    pr = int(e.prev_sib[v])
    nx = int(e.next_sib[v])
    if pr >= 0:
        e.next_sib[pr] = nx
    else:
        e.first_child[owner] = nx
    if nx >= 0:
        e.prev_sib[nx] = pr
    else:
        e.last_child[owner] = pr


def _ee_append(e, u, v):
    t = int(e.last_child[u])
    e.prev_sib[v] = t
    e.next_sib[v] = -1
    if t >= 0:
        e.next_sib[t] = v
    else:
        e.first_child[u] = v
    e.last_child[u] = v


def _ee_reorder(e):
    """Recompute positions: each root child's subtree is traversed level
    by level before the next root child starts."""
    order = e.order
    first_child, next_sib = e.first_child, e.next_sib
    q = e.scratch
    pos = 0
    c = int(first_child[e.root])
    while c >= 0:
        qh = 0
        qt = 1
        q[0] = c
        while qh < qt:
            x = int(q[qh])
            qh += 1
            pos += 1
            order[x] = pos
            y = int(first_child[x])
            while y >= 0:
                q[qt] = y
                qt += 1
                y = int(next_sib[y])
        c = int(next_sib[c])
