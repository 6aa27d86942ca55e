"""Build script.

The compiled kernels (`liact._kernels`) are optional: when Cython or a C
compiler is unavailable the package installs pure-Python only and selects
the fallback backend at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "liact._kernels",
                sources=["src/liact/_kernels.pyx"],
                extra_compile_args=["-O2"],
            )
        ],
        language_level=3,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": False,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
