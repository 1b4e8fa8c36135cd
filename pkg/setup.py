"""Build script: compiles the optional Cython kernel extension.

The extension is an accelerator only; if Cython, a C compiler, or the build
itself is unavailable the package installs without it and falls back to the
pure-NumPy kernels at import time.  Set POWERCAST_NO_EXT=1 to skip the
extension build explicitly.

-ffast-math/-march=native let GCC vectorize the sigmoid/tanh loops through
libmvec; on toolchains without those vector symbols the module still builds
and simply fails to import, which selects the NumPy backend.
"""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Treat extension build failures as a soft skip, not an install error."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"WARNING: skipping compiled kernels ({exc}); using NumPy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"WARNING: skipping {ext.name} ({exc}); using NumPy fallback")


ext_modules = []
if os.environ.get("POWERCAST_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "powercast.kernels._core",
                    ["src/powercast/kernels/_core.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3", "-ffast-math", "-march=native"],
                    extra_link_args=["-lmvec"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
