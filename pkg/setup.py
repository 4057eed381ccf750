import numpy
from setuptools import setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize("src/bgtkit/kernels/_speedups.pyx", language_level=3),
    include_dirs=[numpy.get_include()],
)
