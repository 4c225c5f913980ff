"""Build script for the optional compiled kernel extension.

The package works without the extension (a numpy twin of every kernel ships
in skewlab.kernels.reference); compiling just makes the Monte Carlo paths
faster.  -ffp-contract=off keeps the compiled arithmetic bit-identical to
the numpy fallback (no fused multiply-adds).
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "skewlab._core",
                ["src/skewlab/_core.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
