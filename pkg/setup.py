"""Build script: compiles the winner-determination kernel as a C extension.

The package works without the extension (a pure-Python/numpy fallback is
selected at import time), so a missing compiler degrades gracefully rather
than failing the install.
"""

import sys

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "aflsim._kernel",
                ["src/aflsim/_kernel.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"warning: building without compiled kernel ({exc})", file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
