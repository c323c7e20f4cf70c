"""Build the optional compiled kernel; the package falls back to NumPy without it."""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, Cython missing, ...
            print(f"warning: compiled kernel not built ({exc}); using NumPy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); using NumPy fallback")


def extensions():
    if os.environ.get("XXZPIN_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    openmp = [] if os.environ.get("XXZPIN_NO_OPENMP") else ["-fopenmp"]
    ext = Extension(
        "xxzpin._kernels",
        ["src/xxzpin/_kernels.pyx"],
        extra_compile_args=["-O3"] + openmp,
        extra_link_args=openmp,
    )
    return cythonize([ext], compiler_directives={"language_level": "3"}, quiet=True)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
