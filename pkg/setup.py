import numpy as np
from setuptools import Extension, setup

# The compiled kernel is optional: the package falls back to the NumPy
# executor at import time if trapkit._speedups is absent.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "trapkit._speedups",
                ["src/trapkit/_speedups.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
