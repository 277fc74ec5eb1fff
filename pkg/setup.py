"""Build hook for the optional compiled kernels.

Metadata lives in pyproject.toml. When Cython or a C compiler is missing
the package still installs and falls back to the pure-Python kernels.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - fallback build
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "coexist._ckernels",
                ["src/coexist/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
