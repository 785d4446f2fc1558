"""Build script: compiles the Cython MVA kernel when a toolchain is available.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile is downgraded to a warning.
"""

import warnings

from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/spe_workbench/_mva_kernel.pyx"],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    warnings.warn(f"Cython kernel not built, using pure-Python fallback: {exc}")
    ext_modules = []

setup(ext_modules=ext_modules)
