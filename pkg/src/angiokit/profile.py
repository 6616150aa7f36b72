"""Vessel width extraction along centerline normals.

For each centerline point the local tangent is estimated from a
moving-average-smoothed copy of the path, the normal is the tangent rotated
90 degrees, and the width is measured by marching along the normal in
half-pixel steps until the march leaves the foreground on both sides.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidCenterError, TooShortError
from .raster import Mask, Point
from .skeleton import Centerline

DEFAULT_WINDOW = 5
DEFAULT_TRIM = 10
MARCH_STEP = 0.5


@dataclass(frozen=True)
class ProfileEntry:
    index: int  # original centerline position
    point: Point
    width: float  # pixels


@dataclass(frozen=True)
class WidthProfile:
    """Per-centerline-point vessel widths, trimmed at both ends."""

    entries: tuple[ProfileEntry, ...]
    smoothing_window: int
    trimmed: int

    def __len__(self) -> int:
        return len(self.entries)

    def widths(self) -> np.ndarray:
        return np.array([e.width for e in self.entries], dtype=np.float64)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("index,x,y,width\n")
        for e in self.entries:
            buf.write(f"{e.index},{e.point.x},{e.point.y},{e.width:.3f}\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "WidthProfile":
        entries = []
        lines = [ln for ln in text.strip().splitlines() if ln]
        for ln in lines[1:]:
            idx, x, y, w = ln.split(",")
            entries.append(ProfileEntry(int(idx), Point(int(x), int(y)), float(w)))
        return WidthProfile(tuple(entries), smoothing_window=0, trimmed=0)


def smooth_tangents(c: Centerline, window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Unit tangent per centerline point, (N, 2) array of (tx, ty).

    Tangents come from central differences over a moving-average-smoothed
    copy of the point sequence (shrinking window near the ends); the first
    and last points use one-sided differences.
    """
    n = len(c)
    if n < window:
        raise TooShortError(f"centerline of {n} points is shorter than window {window}")
    xy = c.as_array()
    half = window // 2
    smoothed = np.empty_like(xy)
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        smoothed[i] = xy[lo:hi].mean(axis=0)

    tangents = np.empty_like(xy)
    tangents[0] = smoothed[1] - smoothed[0]
    tangents[-1] = smoothed[-1] - smoothed[-2]
    if n > 2:
        tangents[1:-1] = smoothed[2:] - smoothed[:-2]

    norms = np.linalg.norm(tangents, axis=1)
    # Coincident smoothed points would yield a zero tangent; borrow the
    # nearest well-defined one to keep the result unit-length.
    bad = np.nonzero(norms == 0)[0]
    good = np.nonzero(norms > 0)[0]
    if good.size == 0:
        raise TooShortError("degenerate centerline: all smoothed points coincide")
    for i in bad:
        j = good[np.argmin(np.abs(good - i))]
        tangents[i] = tangents[j]
        norms[i] = norms[j]
    return tangents / norms[:, None]


def width_at(mask: Mask, p: Point, normal: tuple[float, float], backend: str | None = None) -> float:
    """Vessel width at p measured along +/-normal.

    Marches in MARCH_STEP increments with nearest-pixel sampling until each
    side leaves the foreground (or the grid); the width is the distance
    between the last interior positions plus one step, compensating the
    half-step stopping bias on both sides.
    """
    if not mask.contains(p) or not mask.pixels[p.y, p.x]:
        raise InvalidCenterError(f"{p} is not a foreground pixel")
    nx, ny = normal
    ax, ay, bx, by = kernels.march(
        mask.pixels.astype(np.uint8), float(p.x), float(p.y), float(nx), float(ny), MARCH_STEP, backend=backend
    )
    return math.sqrt((ax - bx) ** 2 + (ay - by) ** 2) + MARCH_STEP


def width_profile(
    mask: Mask,
    c: Centerline,
    window: int = DEFAULT_WINDOW,
    trim: int = DEFAULT_TRIM,
    backend: str | None = None,
) -> WidthProfile:
    """Width at every non-trimmed centerline point, with smoothed normals.

    ``trim`` points are dropped at each end, where normals degrade as the
    mask runs out. Entries keep their original centerline indices.
    """
    n = len(c)
    if n <= 2 * trim + window:
        raise TooShortError(f"centerline of {n} points needs > {2 * trim + window}")
    tangents = smooth_tangents(c, window=window)
    grid = mask.pixels.astype(np.uint8)
    backend_mod = kernels.get_backend(backend)

    entries = []
    for i in range(trim, n - trim):
        p = c.points[i]
        if not mask.pixels[p.y, p.x]:
            raise InvalidCenterError(f"centerline point {p} at index {i} is on background")
        tx, ty = tangents[i]
        nx, ny = -ty, tx  # tangent rotated 90 degrees
        ax, ay, bx, by = backend_mod.march(grid, float(p.x), float(p.y), float(nx), float(ny), MARCH_STEP)
        w = math.sqrt((ax - bx) ** 2 + (ay - by) ** 2) + MARCH_STEP
        entries.append(ProfileEntry(i, p, w))
    return WidthProfile(tuple(entries), smoothing_window=window, trimmed=trim)
