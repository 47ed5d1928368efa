# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled kernel backend; mirrors ``sebfs._corepy`` loop for loop."""

from .sketch import (
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
    S_PEAK,
    S_POOL_PTR,
    S_QUEUE_END,
    S_REDUCES,
    S_SETTLED,
    S_STAGE_STAMP,
    S_STAGED,
    S_TREE,
    S_TREE_STAMP,
    SketchFullError,
)

import numpy as np

BACKEND_NAME = "compiled"

cdef long long INF = <long long>1 << 62
cdef long long NO_PARENT = -1

# edge chunks arrive in the file's native width or as int64
ctypedef unsigned int u32_t
ctypedef unsigned long long u64_t
ctypedef long long i64_t

ctypedef fused id_in:
    u32_t
    u64_t
    i64_t

cdef Py_ssize_t I_TREE = S_TREE
cdef Py_ssize_t I_STAGED = S_STAGED
cdef Py_ssize_t I_POOL_PTR = S_POOL_PTR
cdef Py_ssize_t I_SETTLED = S_SETTLED
cdef Py_ssize_t I_FRONTIER = S_FRONTIER
cdef Py_ssize_t I_FRONTIER2 = S_FRONTIER2
cdef Py_ssize_t I_GATE = S_GATE
cdef Py_ssize_t I_GATE_MIN = S_GATE_MIN
cdef Py_ssize_t I_FLUSHES = S_FLUSHES
cdef Py_ssize_t I_EPOCH = S_EPOCH
cdef Py_ssize_t I_TREE_STAMP = S_TREE_STAMP
cdef Py_ssize_t I_STAGE_STAMP = S_STAGE_STAMP
cdef Py_ssize_t I_BON_VALID = S_BON_VALID
cdef Py_ssize_t I_QUEUE_END = S_QUEUE_END
cdef Py_ssize_t I_PEAK = S_PEAK
cdef Py_ssize_t I_REDUCES = S_REDUCES
cdef Py_ssize_t I_CAPACITY = S_CAPACITY
cdef Py_ssize_t I_NACTIVE = S_NACTIVE
cdef Py_ssize_t I_NCAND = S_NCAND


cdef class _K:
    """Per-call view over a SketchState's arrays."""

    cdef long long[::1] order, parent, queue, mark
    cdef long long[::1] child_head, child_tail, child_stamp
    cdef long long[::1] staged_head, staged_tail, staged_stamp
    cdef long long[::1] pool_node, pool_next, cand, scal
    cdef Py_ssize_t pool_size

    def __cinit__(self, s):
        self.order = s.order
        self.parent = s.parent
        self.queue = s.queue
        self.mark = s.mark
        self.child_head = s.child_head
        self.child_tail = s.child_tail
        self.child_stamp = s.child_stamp
        self.staged_head = s.staged_head
        self.staged_tail = s.staged_tail
        self.staged_stamp = s.staged_stamp
        self.pool_node = s.pool_node
        self.pool_next = s.pool_next
        self.cand = s.cand
        self.scal = s.scal
        self.pool_size = s.pool_node.shape[0]

    cdef int _stage(self, long long u, long long v) except -1:
        cdef long long[::1] sc = self.scal
        cdef long long slot
        if sc[I_TREE] + sc[I_STAGED] >= sc[I_CAPACITY]:
            raise SketchFullError("edge budget reached; reduce before staging")
        slot = sc[I_POOL_PTR]
        if slot >= <long long>self.pool_size:
            raise SketchFullError("slot pool exhausted")
        sc[I_POOL_PTR] = slot + 1
        self.pool_node[slot] = v
        self.pool_next[slot] = -1
        if self.staged_stamp[u] != sc[I_STAGE_STAMP] or self.staged_head[u] < 0:
            self.staged_head[u] = slot
            self.staged_stamp[u] = sc[I_STAGE_STAMP]
        else:
            self.pool_next[self.staged_tail[u]] = slot
        self.staged_tail[u] = slot
        sc[I_STAGED] += 1
        if sc[I_TREE] + sc[I_STAGED] > sc[I_PEAK]:
            sc[I_PEAK] = sc[I_TREE] + sc[I_STAGED]
        return 0

    cdef long long _drain(self, long long head, long long tail, long long epoch):
        cdef long long[::1] sc = self.scal
        cdef long long tree_stamp = sc[I_TREE_STAMP]
        cdef long long stage_stamp = sc[I_STAGE_STAMP]
        cdef long long v, c, slot
        while head < tail:
            v = self.queue[head]
            self.order[v] = head
            head += 1
            if self.child_stamp[v] == tree_stamp:
                slot = self.child_head[v]
                while slot >= 0:
                    c = self.pool_node[slot]
                    if self.mark[c] != epoch:
                        self.mark[c] = epoch
                        self.parent[c] = v
                        self.queue[tail] = c
                        tail += 1
                    slot = self.pool_next[slot]
            if self.staged_stamp[v] == stage_stamp:
                slot = self.staged_head[v]
                while slot >= 0:
                    c = self.pool_node[slot]
                    if self.mark[c] != epoch:
                        self.mark[c] = epoch
                        self.parent[c] = v
                        self.queue[tail] = c
                        tail += 1
                    slot = self.pool_next[slot]
        return head

    cdef void _rebuild(self, long long lo, long long hi):
        cdef long long[::1] sc = self.scal
        cdef long long settled, stamp, pos, v, p, slot
        sc[I_TREE_STAMP] += 1
        sc[I_STAGE_STAMP] += 1
        sc[I_POOL_PTR] = 0
        sc[I_TREE] = 0
        sc[I_STAGED] = 0
        settled = sc[I_SETTLED]
        stamp = sc[I_TREE_STAMP]
        for pos in range(lo, hi):
            v = self.queue[pos]
            p = self.parent[v]
            if p == NO_PARENT or self.order[p] <= settled:
                continue
            slot = sc[I_POOL_PTR]
            sc[I_POOL_PTR] = slot + 1
            self.pool_node[slot] = v
            self.pool_next[slot] = -1
            if self.child_stamp[p] != stamp or self.child_head[p] < 0:
                self.child_head[p] = slot
                self.child_stamp[p] = stamp
            else:
                self.pool_next[self.child_tail[p]] = slot
            self.child_tail[p] = slot
            sc[I_TREE] += 1
        if sc[I_TREE] + sc[I_STAGED] > sc[I_PEAK]:
            sc[I_PEAK] = sc[I_TREE] + sc[I_STAGED]

    cdef void _reduce(self):
        cdef long long[::1] sc = self.scal
        cdef long long n_active, settled, ncand, pos, u, epoch, head, tail, idx
        sc[I_REDUCES] += 1
        n_active = sc[I_NACTIVE]
        settled = sc[I_SETTLED]
        if n_active == 0:
            sc[I_QUEUE_END] = 1
            sc[I_BON_VALID] = 1
            self._rebuild(1, 1)
            return
        if sc[I_BON_VALID]:
            ncand = 0
            for pos in range(settled + 1, sc[I_QUEUE_END]):
                u = self.queue[pos]
                if self.parent[u] == NO_PARENT:
                    self.cand[ncand] = u
                    ncand += 1
            sc[I_NCAND] = ncand
        sc[I_EPOCH] += 1
        epoch = sc[I_EPOCH]
        head = settled + 1
        tail = (sc[I_FRONTIER] if sc[I_FRONTIER] > settled else settled) + 1
        for pos in range(head, tail):
            self.mark[self.queue[pos]] = epoch
        head = self._drain(head, tail, epoch)
        for idx in range(sc[I_NCAND]):
            u = self.cand[idx]
            if self.mark[u] == epoch:
                continue
            self.mark[u] = epoch
            self.parent[u] = NO_PARENT
            self.queue[head] = u
            head = self._drain(head, head + 1, epoch)
        sc[I_QUEUE_END] = head
        sc[I_BON_VALID] = 1
        self._rebuild(settled + 1, head)


def reduce_sketch(s):
    cdef _K k = _K(s)
    k._reduce()


def stage_batch_raw(s, const id_in[::1] sv, const id_in[::1] dv):
    cdef _K k = _K(s)
    cdef Py_ssize_t j
    for j in range(sv.shape[0]):
        k._stage(<long long>sv[j], <long long>dv[j])


def setup_stage_batch(s, const id_in[::1] sv, const id_in[::1] dv):
    cdef _K k = _K(s)
    cdef long long[::1] sc = k.scal
    cdef Py_ssize_t j
    cdef int flushes = 0
    for j in range(sv.shape[0]):
        k._stage(<long long>sv[j], <long long>dv[j])
        if sc[I_TREE] + sc[I_STAGED] >= sc[I_CAPACITY]:
            k._reduce()
            flushes += 1
    sc[I_FLUSHES] += flushes
    return flushes


def scan_batch(s, const id_in[::1] sv, const id_in[::1] dv, int enlarge_open, eflags):
    cdef _K k = _K(s)
    cdef unsigned char[::1] fl = eflags
    cdef long long[::1] sc = k.scal
    cdef long long settled = sc[I_SETTLED]
    cdef long long frontier = sc[I_FRONTIER]
    cdef long long frontier2 = sc[I_FRONTIER2]
    cdef long long u, v, bu, bv, p, gate, pb
    cdef Py_ssize_t j
    cdef int flushes = 0
    for j in range(sv.shape[0]):
        u = <long long>sv[j]
        bu = k.order[u]
        if bu <= settled:
            continue
        v = <long long>dv[j]
        bv = k.order[v]
        if bv <= frontier:
            continue
        if enlarge_open and bu > frontier and bv > frontier2:
            fl[j] = 1
        p = k.parent[v]
        if p == u:
            continue
        gate = sc[I_GATE]
        if gate <= bu:
            if bv < gate:
                continue
        else:
            pb = INF if p == NO_PARENT else k.order[p]
            if bu < bv and bu < pb:
                sc[I_GATE] = bu
                if bu < sc[I_GATE_MIN]:
                    sc[I_GATE_MIN] = bu
            else:
                continue
        k._stage(u, v)
        if sc[I_TREE] + sc[I_STAGED] >= sc[I_CAPACITY]:
            k._reduce()
            flushes += 1
            sc[I_GATE] = INF
    sc[I_FLUSHES] += flushes
    return flushes


def finish_pass(s):
    cdef _K k = _K(s)
    if k.scal[I_STAGED] > 0:
        k._reduce()
        return 1
    return 0


def find_child_bound(s, alpha, beta):
    cdef _K k = _K(s)
    cdef long long a = alpha
    cdef long long b = beta
    cdef long long n_active = k.scal[I_NACTIVE]
    cdef long long stamp = k.scal[I_TREE_STAMP]
    cdef long long pos, u
    if b > n_active:
        b = n_active
    if b < a:
        b = a
    for pos in range(b, a, -1):
        u = k.queue[pos]
        if k.child_stamp[u] == stamp and k.child_head[u] >= 0:
            return int(k.order[k.pool_node[k.child_tail[u]]])
    return int(b)


def evict_range(s, alpha, settled, out_parent, out_child, out_rank):
    cdef _K k = _K(s)
    cdef long long[::1] op = out_parent
    cdef long long[::1] oc = out_child
    cdef long long[::1] orr = out_rank
    cdef long long stamp = k.scal[I_TREE_STAMP]
    cdef long long pos, u, slot, rank
    cdef Py_ssize_t count = 0
    for pos in range(<long long>alpha + 1, <long long>settled + 1):
        u = k.queue[pos]
        if k.child_stamp[u] != stamp:
            continue
        slot = k.child_head[u]
        rank = 0
        while slot >= 0:
            op[count] = u
            oc[count] = k.pool_node[slot]
            orr[count] = rank
            count += 1
            rank += 1
            slot = k.pool_next[slot]
        if rank:
            k.child_head[u] = -1
            k.child_tail[u] = -1
            k.scal[I_TREE] -= rank
    return count


def init_full_star(s):
    cdef _K k = _K(s)
    cdef long long n = k.order.shape[0]
    cdef long long v
    for v in range(n):
        k.order[v] = v + 1
        k.parent[v] = NO_PARENT
        k.queue[v + 1] = v
    k.scal[I_QUEUE_END] = n + 1
    k.scal[I_BON_VALID] = 1
    k.scal[I_SETTLED] = 0
    k.scal[I_FRONTIER] = 0
    k._rebuild(1, n + 1)


cdef class _E:
    """Per-call view over an EEState."""

    cdef long long[::1] order, parent, first_child, last_child, prev_sib, next_sib, scratch
    cdef long long root

    def __cinit__(self, e):
        self.order = e.order
        self.parent = e.parent
        self.first_child = e.first_child
        self.last_child = e.last_child
        self.prev_sib = e.prev_sib
        self.next_sib = e.next_sib
        self.scratch = e.scratch
        self.root = e.root

    cdef void _detach(self, long long v, long long p):
        cdef long long owner = self.root if p == NO_PARENT else p
        cdef long long pr = self.prev_sib[v]
        cdef long long nx = self.next_sib[v]
        if pr >= 0:
            self.next_sib[pr] = nx
        else:
            self.first_child[owner] = nx
        if nx >= 0:
            self.prev_sib[nx] = pr
        else:
            self.last_child[owner] = pr

    cdef void _append(self, long long u, long long v):
        cdef long long t = self.last_child[u]
        self.prev_sib[v] = t
        self.next_sib[v] = -1
        if t >= 0:
            self.next_sib[t] = v
        else:
            self.first_child[u] = v
        self.last_child[u] = v

    cdef void _reorder(self):
        cdef long long pos = 0
        cdef long long c, x, y
        cdef Py_ssize_t qh, qt
        c = self.first_child[self.root]
        while c >= 0:
            qh = 0
            qt = 1
            self.scratch[0] = c
            while qh < qt:
                x = self.scratch[qh]
                qh += 1
                pos += 1
                self.order[x] = pos
                y = self.first_child[x]
                while y >= 0:
                    self.scratch[qt] = y
                    qt += 1
                    y = self.next_sib[y]
            c = self.next_sib[c]


def ee_scan_batch(e, const id_in[::1] sv, const id_in[::1] dv):
    cdef _E k = _E(e)
    cdef long long u, v, bu, p
    cdef Py_ssize_t j
    cdef int restructures = 0
    for j in range(sv.shape[0]):
        u = <long long>sv[j]
        v = <long long>dv[j]
        if k.parent[v] == u:
            continue
        bu = k.order[u]
        if bu >= k.order[v]:
            continue
        p = k.parent[v]
        if p != NO_PARENT and k.order[p] <= bu:
            continue
        k._detach(v, p)
        k._append(u, v)
        k.parent[v] = u
        k._reorder()
        restructures += 1
    return restructures


def sort_pairs_by_source(const id_in[::1] src, const id_in[::1] dst, long long n):
    """Stable counting sort of an edge chunk by source id.

    Groups records by source in ascending order while preserving each
    source's arrival order; returns new arrays of the input dtype.
    """
    cdef Py_ssize_t m = src.shape[0]
    if id_in is u32_t:
        dtype = np.uint32
    elif id_in is u64_t:
        dtype = np.uint64
    else:
        dtype = np.int64
    src_out_arr = np.empty(m, dtype)
    dst_out_arr = np.empty(m, dtype)
    cdef id_in[::1] src_out = src_out_arr
    cdef id_in[::1] dst_out = dst_out_arr
    counts_arr = np.zeros(n + 1, np.int64)
    cdef long long[::1] counts = counts_arr
    cdef Py_ssize_t j
    cdef long long u, total, c, pos
    for j in range(m):
        counts[<Py_ssize_t>src[j]] += 1
    total = 0
    for u in range(n + 1):
        c = counts[u]
        counts[u] = total
        total += c
    for j in range(m):
        u = <long long>src[j]
        pos = counts[u]
        counts[u] = pos + 1
        src_out[pos] = src[j]
        dst_out[pos] = dst[j]
    return src_out_arr, dst_out_arr
