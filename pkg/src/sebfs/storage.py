"""Binary edge-file formats and byte-accounted storage access.

Graph files carry a 24-byte header followed by fixed-width little-endian
``(src, dst)`` records::

    magic     4s   b"SEBG"
    version   u16  currently 1
    id_width  u8   bytes per node id, 4 or 8
    reserved  u8   zero
    n         u64  node count
    m         u64  record count

Partition files and scratch edge lists reuse the record layout without a
header; their geometry (id width, record count) travels in the owning
object. Tree files (magic ``b"SEBT"``) store the breadth-first position
array and the parent array back to back as signed 64-bit words.

Every byte that crosses the storage boundary goes through an
:class:`IoMeter`, exactly once. Readers may buffer ahead, but records are
always delivered in file order.
"""

from __future__ import annotations

import os
import struct
import threading

import numpy as np

GRAPH_MAGIC = b"SEBG"
TREE_MAGIC = b"SEBT"
FORMAT_VERSION = 1
_GRAPH_HEADER = struct.Struct("<4sHBBQQ")
_TREE_HEADER = struct.Struct("<4sHHQ")

HEADER_BYTES = _GRAPH_HEADER.size
TREE_HEADER_BYTES = _TREE_HEADER.size

NO_PARENT = -1  # parent sentinel: node hangs off the dummy root

DEFAULT_CHUNK_EDGES = 1 << 20


class StorageError(Exception):
    """Corrupt file, bad header, or an id outside the declared node range."""


class IoMeter:
    """Monotone counters of bytes read from / written to storage."""

    def __init__(self):
        self._lock = threading.Lock()
        self.bytes_read = 0
        self.bytes_written = 0

    def add_read(self, nbytes):
        with self._lock:
            self.bytes_read += nbytes

    def add_write(self, nbytes):
        with self._lock:
            self.bytes_written += nbytes

    @property
    def total(self):
        return self.bytes_read + self.bytes_written

    def snapshot(self):
        return (self.bytes_read, self.bytes_written)


def _id_dtype(id_width):
    if id_width == 4:
        return np.dtype("<u4")
    if id_width == 8:
        return np.dtype("<u8")
    raise StorageError(f"unsupported id width {id_width}")


def id_width_for(n):
    """Narrowest supported id width able to encode node ids below n."""
    return 4 if n <= (1 << 32) else 8


def _read_exact(f, nbytes, meter):
    data = f.read(nbytes)
    if meter is not None:
        meter.add_read(len(data))
    if len(data) != nbytes:
        raise StorageError("unexpected end of file")
    return data


class GraphFile:
    """Handle to an on-disk edge list; header is validated on open."""

    def __init__(self, path, n, m, id_width):
        self.path = str(path)
        self.n = n
        self.m = m
        self.id_width = id_width

    @property
    def payload_bytes(self):
        return 2 * self.id_width * self.m

    @classmethod
    def open(cls, path, meter=None):
        with open(path, "rb") as f:
            raw = _read_exact(f, HEADER_BYTES, meter)
        magic, version, id_width, _, n, m = _GRAPH_HEADER.unpack(raw)
        if magic != GRAPH_MAGIC:
            raise StorageError(f"{path}: not a graph file (magic {magic!r})")
        if version != FORMAT_VERSION:
            raise StorageError(f"{path}: unsupported version {version}")
        _id_dtype(id_width)
        expect = HEADER_BYTES + 2 * id_width * m
        actual = os.path.getsize(path)
        if actual != expect:
            raise StorageError(
                f"{path}: header says {expect} bytes, file has {actual}"
            )
        return cls(path, n, m, id_width)

    def iter_chunks(self, meter, chunk_edges=DEFAULT_CHUNK_EDGES, raw=False):
        """Yield (src, dst) chunks in file order, crediting reads.

        raw=True keeps the file's native unsigned dtype (no int64 copy);
        the default converts to int64.
        """
        return _iter_pairs(
            self.path, self.id_width, HEADER_BYTES, self.m, meter, chunk_edges, raw
        )

    def read_all(self, meter=None):
        """Whole edge list as two int64 arrays; small graphs only."""
        srcs, dsts = [], []
        for src, dst in self.iter_chunks(meter):
            srcs.append(src)
            dsts.append(dst)
        if not srcs:
            e = np.empty(0, np.int64)
            return e, e.copy()
        return np.concatenate(srcs), np.concatenate(dsts)


def _iter_pairs(path, id_width, offset, count, meter, chunk_edges, raw=False):
    dtype = _id_dtype(id_width)
    rec = 2 * id_width
    with open(path, "rb") as f:
        if offset:
            f.seek(offset)
        left = count
        while left > 0:
            take = min(left, chunk_edges)
            data = f.read(take * rec)
            if meter is not None:
                meter.add_read(len(data))
            if len(data) != take * rec:
                raise StorageError(f"{path}: truncated edge payload")
            flat = np.frombuffer(data, dtype=dtype)
            if not raw:
                flat = flat.astype(np.int64)
            yield np.ascontiguousarray(flat[0::2]), np.ascontiguousarray(flat[1::2])
            left -= take


class GraphWriter:
    """Streams (src, dst) records into a new graph file.

    The header is written up front with a zero record count and patched on
    close, once the final count is known.
    """

    def __init__(self, path, n, id_width=None, meter=None):
        self.path = str(path)
        self.n = n
        self.id_width = id_width or id_width_for(n)
        self._dtype = _id_dtype(self.id_width)
        self._meter = meter
        self._m = 0
        self._f = open(self.path, "wb")
        self._write_header(0)

    def _write_header(self, m):
        raw = _GRAPH_HEADER.pack(
            GRAPH_MAGIC, FORMAT_VERSION, self.id_width, 0, self.n, m
        )
        self._f.write(raw)
        if self._meter is not None:
            self._meter.add_write(len(raw))

    def write(self, src, dst):
        if len(src) == 0:
            return
        lo = min(src.min(), dst.min())
        hi = max(src.max(), dst.max())
        if lo < 0 or hi >= self.n:
            raise StorageError(f"edge id {hi if hi >= self.n else lo} outside [0, {self.n})")
        buf = np.empty(2 * len(src), dtype=self._dtype)
        buf[0::2] = src
        buf[1::2] = dst
        raw = buf.tobytes()
        self._f.write(raw)
        if self._meter is not None:
            self._meter.add_write(len(raw))
        self._m += len(src)

    def close(self):
        self._f.seek(0)
        self._write_header(self._m)
        self._f.close()
        return GraphFile(self.path, self.n, self._m, self.id_width)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.close()
        else:
            self._f.close()


class RecordFile:
    """Headerless (src, dst) record list used for partitions and scratch."""

    def __init__(self, path, id_width, edges=0):
        self.path = str(path)
        self.id_width = id_width
        self.edges = edges

    def iter_chunks(self, meter, chunk_edges=DEFAULT_CHUNK_EDGES, raw=False):
        return _iter_pairs(self.path, self.id_width, 0, self.edges, meter, chunk_edges, raw)

    def read_all(self, meter=None):
        srcs, dsts = [], []
        for src, dst in self.iter_chunks(meter):
            srcs.append(src)
            dsts.append(dst)
        if not srcs:
            e = np.empty(0, np.int64)
            return e, e.copy()
        return np.concatenate(srcs), np.concatenate(dsts)

    def delete(self):
        try:
            os.unlink(self.path)
        except FileNotFoundError:
            pass


class RecordWriter:
    """Append-only writer producing a :class:`RecordFile`."""

    def __init__(self, path, id_width, meter=None):
        self.path = str(path)
        self.id_width = id_width
        self._dtype = _id_dtype(id_width)
        self._meter = meter
        self._edges = 0
        self._f = open(self.path, "wb")

    @property
    def edges(self):
        return self._edges

    def write(self, src, dst):
        if len(src) == 0:
            return
        buf = np.empty(2 * len(src), dtype=self._dtype)
        buf[0::2] = src
        buf[1::2] = dst
        raw = buf.tobytes()
        self._f.write(raw)
        if self._meter is not None:
            self._meter.add_write(len(raw))
        self._edges += len(src)

    def close(self):
        self._f.close()
        return RecordFile(self.path, self.id_width, self._edges)


class EvictLog:
    """Append-only log of (parent, child, sibling_rank) u64 triples.

    Holds exactly the tree edges evicted once their parent's position is
    final; ranks make the child order replayable.
    """

    RECORD = 24

    def __init__(self, path, meter=None):
        self.path = str(path)
        self._meter = meter
        self._f = open(self.path, "wb")
        self.records = 0

    def append(self, parents, children, ranks):
        if len(parents) == 0:
            return
        buf = np.empty(3 * len(parents), dtype="<u8")
        buf[0::3] = parents
        buf[1::3] = children
        buf[2::3] = ranks
        raw = buf.tobytes()
        self._f.write(raw)
        if self._meter is not None:
            self._meter.add_write(len(raw))
        self.records += len(parents)

    def close(self):
        self._f.close()

    def replay(self, meter=None):
        """Yield (parent, child, rank) int64 arrays in append order."""
        with open(self.path, "rb") as f:
            while True:
                data = f.read(DEFAULT_CHUNK_EDGES * self.RECORD)
                if meter is not None:
                    meter.add_read(len(data))
                if not data:
                    return
                flat = np.frombuffer(data, dtype="<u8").astype(np.int64)
                yield (
                    np.ascontiguousarray(flat[0::3]),
                    np.ascontiguousarray(flat[1::3]),
                    np.ascontiguousarray(flat[2::3]),
                )


def write_tree_file(path, order, parent, meter=None):
    """Persist a BFS tree: positions are 1..n, parents -1 for root children."""
    n = len(order)
    with open(path, "wb") as f:
        raw = _TREE_HEADER.pack(TREE_MAGIC, FORMAT_VERSION, 0, n)
        f.write(raw)
        f.write(np.asarray(order, dtype="<i8").tobytes())
        f.write(np.asarray(parent, dtype="<i8").tobytes())
    if meter is not None:
        meter.add_write(TREE_HEADER_BYTES + 16 * n)


def read_tree_file(path, meter=None):
    with open(path, "rb") as f:
        raw = _read_exact(f, TREE_HEADER_BYTES, meter)
        magic, version, _, n = _TREE_HEADER.unpack(raw)
        if magic != TREE_MAGIC:
            raise StorageError(f"{path}: not a tree file")
        if version != FORMAT_VERSION:
            raise StorageError(f"{path}: unsupported version {version}")
        order = np.frombuffer(_read_exact(f, 8 * n, meter), dtype="<i8").astype(np.int64)
        parent = np.frombuffer(_read_exact(f, 8 * n, meter), dtype="<i8").astype(np.int64)
    return order, parent
