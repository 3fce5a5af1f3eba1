"""Builds the optional Cython kernels.  Without Cython or a compiler the
package installs pure-Python and ``genlink.kernels`` falls back at import."""
from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("genlink._kernels", ["src/genlink/_kernels.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
