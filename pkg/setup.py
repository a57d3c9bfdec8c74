import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "graspnbv.kernels._core",
                ["src/graspnbv/kernels/_core.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-python fallback is selected at import time if the extension
    # is missing, so a cython-less build still works.
    ext_modules = []

setup(ext_modules=ext_modules)
