import os

import numpy as np
import pytest

from sebfs.kernels import available_backends, get_backend
from sebfs.storage import GraphFile, GraphWriter


@pytest.fixture(params=available_backends())
def backend(request):
    """Run a test against every built kernel backend."""
    return get_backend(request.param)


@pytest.fixture
def scratch(tmp_path):
    path = tmp_path / "scratch"
    path.mkdir()
    return str(path)


def write_graph(path, n, edges):
    """Edge list (python pairs, in order) -> graph file on disk."""
    with GraphWriter(str(path), n) as w:
        if edges:
            w.write(
                np.array([e[0] for e in edges], np.int64),
                np.array([e[1] for e in edges], np.int64),
            )
    return GraphFile.open(str(path))


def random_simple_digraph(rng, n, m):
    """m distinct non-loop edges in uniform random order."""
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    idx = rng.permutation(len(pairs))[:m]
    return [pairs[i] for i in idx]


@pytest.fixture
def graph_factory(tmp_path):
    counter = [0]

    def make(n, edges):
        counter[0] += 1
        return write_graph(tmp_path / f"g{counter[0]}.graph", n, edges)

    return make
