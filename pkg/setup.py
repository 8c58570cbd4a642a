import sys

import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class optional_build_ext(build_ext):
    """Build the compiled kernels if possible; fall back to pure Python."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"WARNING: compiled kernels not built ({exc}); "
                  "chiptrap will use the pure-Python backend", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"WARNING: failed to compile {ext.name} ({exc}); "
                  "chiptrap will use the pure-Python backend", file=sys.stderr)


compile_args = ["-O3", "-fno-math-errno"]
link_args = []
if sys.platform.startswith("linux"):
    compile_args += ["-fopenmp"]
    link_args += ["-fopenmp"]

ext_modules = [
    Extension(
        "chiptrap._kernels._core",
        ["src/chiptrap/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=compile_args,
        extra_link_args=link_args,
    )
]

if cythonize is not None:
    ext_modules = cythonize(ext_modules, language_level=3)
else:
    ext_modules = []

setup(
    ext_modules=ext_modules,
    cmdclass={"build_ext": optional_build_ext},
)
