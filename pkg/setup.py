"""Build hook for the optional compiled kernels.

The package is fully functional without the extension: `comptra._kernels`
falls back to pure-Python implementations at import time. Compilation is
attempted here and skipped (with a notice) when Cython or a C toolchain is
unavailable.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/comptra/_kernels/_speedups.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    print("comptra: Cython not available, building without compiled kernels")

setup(ext_modules=ext_modules)
