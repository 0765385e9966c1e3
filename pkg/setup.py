"""Build script: compiles the optional bitset kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile is downgraded to a warning.
"""
import sys

from setuptools import setup
from setuptools.extension import Extension


def extensions():
    try:
        from Cython.Build import cythonize
        import numpy as np
    except ImportError:
        return []
    ext = Extension(
        "greedyproc._speedups",
        ["src/greedyproc/_speedups.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={
        "language_level": 3,
        "boundscheck": False,
        "wraparound": False,
        "cdivision": True,
    })


try:
    setup(ext_modules=extensions())
except SystemExit:
    print("warning: extension build failed; installing pure-python fallback only",
          file=sys.stderr)
    setup(ext_modules=[])
