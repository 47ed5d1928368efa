import numpy as np
import pytest

from sebfs.storage import (
    HEADER_BYTES,
    EvictLog,
    GraphFile,
    GraphWriter,
    IoMeter,
    RecordWriter,
    StorageError,
    read_tree_file,
    write_tree_file,
)

from conftest import write_graph


def test_empty_graph_round_trip(tmp_path):
    g = write_graph(tmp_path / "g.graph", 5, [])
    assert g.n == 5 and g.m == 0
    src, dst = g.read_all()
    assert len(src) == 0 and len(dst) == 0


def test_two_edge_round_trip_preserves_order(tmp_path):
    g = write_graph(tmp_path / "g.graph", 3, [(0, 1), (1, 2)])
    assert g.m == 2
    src, dst = g.read_all()
    assert src.tolist() == [0, 1] and dst.tolist() == [1, 2]


def test_payload_size_matches_format_arithmetic(tmp_path):
    # 1e6 records at id_width 4: payload is exactly 8 bytes per record
    rng = np.random.default_rng(0)
    m = 1_000_000
    path = tmp_path / "big.graph"
    with GraphWriter(str(path), 1000) as w:
        w.write(rng.integers(0, 1000, m), rng.integers(0, 1000, m))
    g = GraphFile.open(str(path))
    assert g.id_width == 4
    assert g.payload_bytes == 8 * m
    assert path.stat().st_size == HEADER_BYTES + 8 * m


def test_id_out_of_range_rejected(tmp_path):
    w = GraphWriter(str(tmp_path / "g.graph"), 3)
    with pytest.raises(StorageError):
        w.write(np.array([0]), np.array([3]))


def test_header_mismatch_detected(tmp_path):
    g = write_graph(tmp_path / "g.graph", 3, [(0, 1), (1, 2)])
    with open(g.path, "ab") as f:
        f.write(b"xx")
    with pytest.raises(StorageError):
        GraphFile.open(g.path)


def test_bad_magic_detected(tmp_path):
    path = tmp_path / "junk.graph"
    path.write_bytes(b"JUNKJUNKJUNKJUNKJUNKJUNK")
    with pytest.raises(StorageError):
        GraphFile.open(str(path))


def test_meter_counts_header_and_payload_once(tmp_path):
    meter = IoMeter()
    path = tmp_path / "g.graph"
    with GraphWriter(str(path), 4, meter=meter) as w:
        w.write(np.array([0, 1, 2]), np.array([1, 2, 3]))
    # header written twice (placeholder + patch), 3 records of 8 bytes
    assert meter.bytes_written == 2 * HEADER_BYTES + 3 * 8
    g = GraphFile.open(str(path), meter)
    for _ in g.iter_chunks(meter):
        pass
    assert meter.bytes_read == HEADER_BYTES + 3 * 8


def test_chunked_iteration_covers_file_in_order(tmp_path):
    edges = [(i % 7, (3 * i + 1) % 7) for i in range(1000)]
    g = write_graph(tmp_path / "g.graph", 7, edges)
    got = []
    for src, dst in g.iter_chunks(None, chunk_edges=64):
        got.extend(zip(src.tolist(), dst.tolist()))
    assert got == edges


def test_raw_mode_keeps_native_dtype(tmp_path):
    g = write_graph(tmp_path / "g.graph", 3, [(0, 1)])
    (src, dst), = list(g.iter_chunks(None, raw=True))
    assert src.dtype == np.uint32


def test_record_writer_round_trip(tmp_path):
    w = RecordWriter(str(tmp_path / "r.edges"), 4)
    w.write(np.array([5, 6]), np.array([7, 8]))
    rec = w.close()
    assert rec.edges == 2
    src, dst = rec.read_all()
    assert src.tolist() == [5, 6] and dst.tolist() == [7, 8]


def test_tree_file_round_trip(tmp_path):
    order = np.array([2, 1, 3], np.int64)
    parent = np.array([1, -1, 0], np.int64)
    meter = IoMeter()
    path = tmp_path / "t.tree"
    write_tree_file(str(path), order, parent, meter)
    o, p = read_tree_file(str(path), meter)
    assert o.tolist() == order.tolist() and p.tolist() == parent.tolist()
    assert meter.bytes_written == meter.bytes_read


def test_evict_log_replays_in_append_order(tmp_path):
    log = EvictLog(str(tmp_path / "ev.log"))
    log.append(np.array([4, 4]), np.array([9, 2]), np.array([0, 1]))
    log.append(np.array([7]), np.array([4]), np.array([0]))
    log.close()
    rows = []
    for par, child, rank in log.replay():
        rows.extend(zip(par.tolist(), child.tolist(), rank.tolist()))
    assert rows == [(4, 9, 0), (4, 2, 1), (7, 4, 0)]
