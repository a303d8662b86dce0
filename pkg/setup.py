"""Build the optional compiled kernels.

The package works without them: ``rmbounds.kernels`` falls back to the
numpy implementation when the extension is missing.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("RMB_NO_EXTENSION"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:  # build without the extension
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "rmbounds._ckernels",
                    ["src/rmbounds/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
