# pyproject.toml carries all metadata; this file only wires up the optional
# Cython kernel, which setuptools cannot express declaratively.
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "adialab._kern._core",
                ["src/adialab/_kern/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
else:
    # No Cython available: install pure-python only, the numpy fallback
    # kernels in adialab._kern._fallback take over at import time.
    extensions = []

setup(ext_modules=extensions)
