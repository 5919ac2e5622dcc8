import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("FMLOCAL_NO_EXT", "") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("fmlocal._kernels", ["src/fmlocal/_kernels.pyx"],
                       include_dirs=[np.get_include()],
                       define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                       extra_compile_args=["-O3"])],
            language_level=3,
        )

setup(ext_modules=ext_modules)
