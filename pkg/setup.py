import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; compass_ft falls back at import
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("COMPASS_FT_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "compass_ft._ufcore",
                ["src/compass_ft/_ufcore.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                language="c++",
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
