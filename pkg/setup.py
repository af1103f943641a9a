import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("SAPD_SKIP_EXT"):
    ext = Extension(
        "sapd.numerics._core",
        ["src/sapd/numerics/_core.pyx"],
        extra_compile_args=["-O3", "-fopenmp"],
        extra_link_args=["-fopenmp"],
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
