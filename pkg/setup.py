"""Build script: compiles the optional event-loop extension.

The package works without the extension (a NumPy/Python fallback is
selected at import time), so failures here degrade the install rather
than break it.  Set WEDGEQ_SKIP_EXT=1 to skip compilation outright.
"""

import os

from setuptools import Extension, setup


def _extensions():
    if os.environ.get("WEDGEQ_SKIP_EXT") == "1":
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "wedgeq._kernels._engine",
        ["src/wedgeq/_kernels/_engine.pyx"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=_extensions())
