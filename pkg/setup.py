import os

import numpy as np
from setuptools import setup, Extension

ext_modules = []
if os.environ.get("MATCHBENCH_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("matchbench._kernels", ["src/matchbench/_kernels.pyx"],
                       include_dirs=[np.get_include()],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
