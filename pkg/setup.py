import sys

from setuptools import setup

# The compiled kernel is optional: sebfs falls back to the pure-Python
# backend when the extension is missing (see sebfs/kernels.py).
ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/sebfs/_core.pyx",
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"sebfs: skipping compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
