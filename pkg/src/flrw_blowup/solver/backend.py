"""Kernel selection: compiled module when importable, numpy otherwise.

Set FLRW_BLOWUP_PURE=1 to force the numpy kernels.
"""

from __future__ import annotations

import os

from . import _numpy_kernels

BACKEND = "numpy"
kernels = _numpy_kernels

if os.environ.get("FLRW_BLOWUP_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"


def get_kernels(name: str | None = None):
    """Kernel module by name ('cython' or 'numpy'); default is the active one."""
    if name is None:
        return kernels
    if name == "numpy":
        return _numpy_kernels
    if name == "cython":
        from . import _kernels  # type: ignore[attr-defined]
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
