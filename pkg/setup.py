import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # build the pure-Python package only
    cythonize = None

ext_modules = []
if cythonize is not None and os.environ.get("HETERO_ORCH_NO_EXT", "") in ("", "0"):
    ext_modules = cythonize(
        [
            Extension(
                "hetero_orch.kernels._ckernels",
                ["src/hetero_orch/kernels/_ckernels.pyx"],
                # No fast-math or FMA contraction: results must match the
                # Python fallback bit for bit.
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
