"""Kernel backend selection.

The hot loops (edge scans and the restructuring BFS) exist twice: a
compiled Cython extension (``sebfs._core``) and a pure-Python twin
(``sebfs._corepy``). The compiled one is picked when importable; set
``SEBFS_PURE_PYTHON=1`` to force the fallback. Both expose the same
module-level functions over the same state arrays.
"""

from __future__ import annotations

import os

if os.environ.get("SEBFS_PURE_PYTHON", "") not in ("", "0"):
    from . import _corepy as backend
else:
    try:
        from . import _core as backend  # type: ignore[attr-defined]
    except ImportError:
        from . import _corepy as backend

BACKEND = backend.BACKEND_NAME


def get_backend(name=None):
    """Resolve a backend by name: None/'' (default), 'python', 'compiled'."""
    if name in (None, "", "default"):
        return backend
    if name == "python":
        from . import _corepy

        return _corepy
    if name == "compiled":
        from . import _core  # raises ImportError when not built

        return _core
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    names = ["python"]
    try:
        get_backend("compiled")
        names.append("compiled")
    except ImportError:
        pass
    return names
