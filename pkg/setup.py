"""Build script for the optional compiled kernels.

The package is fully functional without the extension; ilans.backend falls
back to the pure-Python kernels when ilans._core is missing.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "ilans._core",
        ["src/ilans/_core.pyx"],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions, compiler_directives={"language_level": "3"}
    )
    if cythonize is not None
    else []
)
