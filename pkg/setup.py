from setuptools import setup, Extension

# The compiled kernels are an optimization only; every entry point has a pure
# Python twin in layerwaves._core.fallback, so a failed build is not fatal.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "layerwaves._core.kernels",
                ["src/layerwaves/_core/kernels.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except Exception:
    ext_modules = []

setup(ext_modules=ext_modules)
