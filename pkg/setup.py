"""Builds the optional compiled search kernel.

The package works without the extension (a pure-Python kernel is selected at
import time); compiling it makes all-pairs routing and failure campaigns
roughly an order of magnitude faster. Requires Cython and a C compiler:

    python setup.py build_ext --inplace
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "transitvuln._speedups",
                ["src/transitvuln/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    extensions = []

setup(ext_modules=extensions)
