"""Builds the optional compiled kernel extension; metadata lives in pyproject.toml."""
from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:  # no toolchain: the numpy fallback is used at import time
    extensions = []
else:
    extensions = cythonize(
        [Extension("trapinv._kernels_c", ["src/trapinv/_kernels_c.pyx"],
                   include_dirs=[numpy.get_include()], language="c++",
                   extra_compile_args=["-O3"], optional=True,
                   define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=extensions)
