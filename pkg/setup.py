import os
import platform

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup


def _cpu_flags():
    try:
        with open("/proc/cpuinfo") as fh:
            return set(next(l for l in fh if l.startswith("flags")).split(":")[1].split())
    except (OSError, StopIteration):
        return set()


args = ["-O3", "-ffast-math"]
libs = []
# AVX2 + FMA (with finite-math from -ffast-math) lets gcc map the
# transcendental loops onto the glibc vector math library.
if (platform.machine() in ("x86_64", "AMD64") and {"avx2", "fma"} <= _cpu_flags()
        and os.environ.get("HAUSDORFF_NO_SIMD") != "1"):
    args += ["-mavx2", "-mfma"]
    libs += ["mvec"]

ext_modules = cythonize(
    [Extension("hausdorff._ckernels", ["src/hausdorff/_ckernels.pyx"],
               include_dirs=[np.get_include(), "src/hausdorff"],
               extra_compile_args=args, libraries=libs)],
    compiler_directives={"language_level": "3"},
)

setup(ext_modules=ext_modules)
