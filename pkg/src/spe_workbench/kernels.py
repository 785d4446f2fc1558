"""Kernel selection: compiled Cython lattice kernel with numpy fallback.

Set SPE_PURE_PYTHON=1 to force the fallback (used by tests and benchmarks).
"""

from __future__ import annotations

import os

from . import _mva_fallback

try:
    from . import _mva_kernel  # compiled extension, optional

    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on build environment
    _mva_kernel = None
    HAVE_COMPILED = False


def active_kernel_name() -> str:
    if HAVE_COMPILED and not os.environ.get("SPE_PURE_PYTHON"):
        return "compiled"
    return "fallback"


def get_mva_lattice(name: str | None = None):
    """Return a lattice kernel by name ('compiled' | 'fallback' | None=auto)."""
    if name is None:
        name = active_kernel_name()
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernel not available")
        return _mva_kernel.mva_lattice
    if name == "fallback":
        return _mva_fallback.mva_lattice
    raise ValueError(f"unknown kernel '{name}'")


def mva_lattice(demand, think, population):
    return get_mva_lattice()(demand, think, population)
