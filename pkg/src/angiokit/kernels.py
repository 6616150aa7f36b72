"""Kernel backend selection: compiled extension when available, numpy fallback.

Set ``ANGIOKIT_PURE_PYTHON=1`` to force the fallback (useful for the
equivalence tests and the benchmark). Both backends are bit-identical.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

_FORCE_PURE = os.environ.get("ANGIOKIT_PURE_PYTHON", "") not in ("", "0")

if not _FORCE_PURE:
    try:
        from . import _native as _impl
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py

ACTIVE_BACKEND: str = _impl.BACKEND_NAME

_BACKENDS = {"pure": _kernels_py}
if _impl is not _kernels_py:
    _BACKENDS["native"] = _impl


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_backend(name: str | None = None):
    """Return the kernel module for `name` (default: the active backend)."""
    if name is None:
        return _impl
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}; available: {available_backends()}") from None


def thin_grid(grid: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Zhang-Suen thin a 0/1 uint8 grid to its fixed point."""
    return get_backend(backend).thin(np.ascontiguousarray(grid, dtype=np.uint8))


def march(
    grid: np.ndarray,
    px: float,
    py: float,
    nx: float,
    ny: float,
    step: float,
    backend: str | None = None,
) -> tuple[float, float, float, float]:
    """Last interior positions of a +/- normal march; see _kernels_py.march."""
    return get_backend(backend).march(
        np.ascontiguousarray(grid, dtype=np.uint8), px, py, nx, ny, step
    )
