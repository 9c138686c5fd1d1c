import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("WQP_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("wqp._polycore", ["src/wqp/_polycore.pyx"])],
            language_level=3,
        )
    except ImportError:
        # the pure-Python kernels in wqp._polyops take over
        ext_modules = []

setup(ext_modules=ext_modules)
