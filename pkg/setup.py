import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("BDM_NO_EXTENSION"):
    try:
        from Cython.Build import cythonize
    except ImportError:  # fall back to the pure-Python kernels
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "bdm._ckernels",
                    sources=["src/bdm/_ckernels.pyx"],
                    libraries=["m"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
