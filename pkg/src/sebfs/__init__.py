"""sebfs: BFS trees for disk-resident directed graphs under a fixed
in-memory edge budget.

Three engines (``ee``, ``eb``, ``ep``) produce ordered spanning trees
validated by a streaming order-violation check; see the README for the
engine trade-offs and the CLI surface.
"""

from .algos import (
    BfsTree,
    TimeLimitExceeded,
    WatchdogExceeded,
    eb_bfs,
    ee_bfs,
    ep_bfs,
    im_bfs,
)
from .graphio import compute_degrees, generate_er, merge_partitions, partition_graph, subsample
from .kernels import BACKEND, available_backends, get_backend
from .oracle import InMemGraph, brute_llsp, is_order_violation, reference_bfs, validate_bfs_tree
from .storage import GraphFile, GraphWriter, IoMeter, read_tree_file, write_tree_file

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BfsTree",
    "GraphFile",
    "GraphWriter",
    "InMemGraph",
    "IoMeter",
    "TimeLimitExceeded",
    "WatchdogExceeded",
    "available_backends",
    "brute_llsp",
    "compute_degrees",
    "eb_bfs",
    "ee_bfs",
    "ep_bfs",
    "generate_er",
    "get_backend",
    "im_bfs",
    "is_order_violation",
    "merge_partitions",
    "partition_graph",
    "read_tree_file",
    "reference_bfs",
    "subsample",
    "validate_bfs_tree",
    "write_tree_file",
]
