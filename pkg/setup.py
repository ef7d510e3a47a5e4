"""Build the optional Cython kernel core.

The package works without it; ``cycletime.kernels`` falls back to the
numpy implementation when the extension is missing.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("CYCLETIME_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "cycletime._kernels",
                    ["src/cycletime/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    # no -ffast-math: the kernels rely on IEEE -inf arithmetic
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
