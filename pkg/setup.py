"""Build script for the compiled kernel extension.

The extension is optional at runtime: etadm falls back to the numpy
kernels in etadm._kernels._pure if the compiled module is missing.
Optimization flags are probed rather than assumed so the build still
works under compilers that reject them.
"""

import os
import tempfile

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext
from Cython.Build import cythonize

CANDIDATE_FLAGS = ["-O3", "-march=native"]


class ProbedBuildExt(build_ext):
    def _flag_works(self, flag):
        with tempfile.TemporaryDirectory() as tmp:
            probe = os.path.join(tmp, "probe.c")
            with open(probe, "w") as fh:
                fh.write("int main(void) { return 0; }\n")
            try:
                self.compiler.compile([probe], output_dir=tmp, extra_postargs=[flag])
            except Exception:
                return False
        return True

    def build_extensions(self):
        flags = [f for f in CANDIDATE_FLAGS if self._flag_works(f)]
        for ext in self.extensions:
            ext.extra_compile_args = flags + list(ext.extra_compile_args or [])
        super().build_extensions()


ext_modules = [
    Extension(
        "etadm._kernels._core",
        sources=["src/etadm/_kernels/_core.pyx"],
    )
]

setup(
    ext_modules=cythonize(ext_modules, language_level=3),
    cmdclass={"build_ext": ProbedBuildExt},
)
