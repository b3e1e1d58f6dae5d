import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "voreal._kernels",
        ["src/voreal/_kernels.pyx"],
        include_dirs=[np.get_include()],
        # no fast-math / fma: kernels must agree bit-for-bit with the numpy twins
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
