"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure numpy/scipy fallback is
selected at import time), so a failed compile only costs speed.  Build
in place with

    python setup.py build_ext --inplace
"""
import sys

from setuptools import Extension, setup


def configured_extensions():
    import numpy as np
    from Cython.Build import cythonize

    ext = Extension(
        "sads_udw.kernels._core",
        sources=["src/sads_udw/kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


try:
    setup(ext_modules=configured_extensions())
except Exception as exc:  # pragma: no cover - degraded build path
    print(f"warning: kernel extension build failed ({exc}); "
          "installing with the pure-python fallback", file=sys.stderr)
    setup()
