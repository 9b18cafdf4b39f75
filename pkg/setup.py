"""Build script for the compiled coefficient kernels.

The extension is optional: if Cython (or a C compiler) is unavailable the
package falls back to the pure-numpy kernels in ``pqlocal._kernels_py``.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "pqlocal._coeffcore",
                ["src/pqlocal/_coeffcore.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
