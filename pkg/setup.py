import os

from setuptools import setup


def _extensions():
    """Build the compiled kernel unless disabled or the toolchain is absent.

    The package works without the extension: motiongraph._kernels falls back
    to the NumPy reference implementation at import time.
    """
    if os.environ.get("MOTIONGRAPH_PURE"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "motiongraph._kernels._core",
        ["src/motiongraph/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off: keep mul+add as two roundings so the compiled
        # kernels are bit-compatible with the pure-Python accumulation order.
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
