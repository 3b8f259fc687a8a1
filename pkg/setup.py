"""Build the optional Cython core.

Use in the current directory:
python setup.py build_ext --inplace

The package works without the extension; ``finrank_krr._backend`` falls
back to the numpy implementation when ``_core`` cannot be imported.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("FINRANK_KRR_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    name="finrank_krr._core",
                    sources=["src/finrank_krr/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
