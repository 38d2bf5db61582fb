"""Build script for the optional compiled kernels.

The package installs and runs without the extension; the numpy fallback
in serpaoi.kernels is selected automatically when the compiled module is
missing (or when SERPAOI_PURE_PYTHON=1 is set).
"""
from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "serpaoi.kernels._rowproj",
                ["src/serpaoi/kernels/_rowproj.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
