"""Build the optional Cython rate kernels.

The package imports a pure-Python fallback when the extension is missing,
so a failed compile degrades speed, not functionality.
"""
import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("CSIREGION_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "csiregion._ckernels",
                ["src/csiregion/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )

setup(ext_modules=ext_modules)
