import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "nvpolar._kernels",
        ["src/nvpolar/_kernels.pyx"],
        include_dirs=[np.get_include()],
        # no FMA contraction: the numpy fallback must match bit for bit
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
