"""Pure-Python/numpy kernel implementations.

These are the fallback twins of the compiled kernels in ``_native``. Both
backends must produce bit-identical output: the thinning rules are pure
boolean logic, and the width march performs the same float64 operations in
the same order (incremental position updates, floor(v + 0.5) pixel snap).
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "pure"


def _subpass_deletions(grid: np.ndarray, first: bool) -> np.ndarray:
    """One Zhang-Suen sub-iteration: boolean map of pixels to delete.

    Neighbor labels follow the usual clockwise order starting north:
    P2=N, P3=NE, P4=E, P5=SE, P6=S, P7=SW, P8=W, P9=NW.
    """
    p = np.pad(grid, 1)
    p2 = p[:-2, 1:-1]
    p3 = p[:-2, 2:]
    p4 = p[1:-1, 2:]
    p5 = p[2:, 2:]
    p6 = p[2:, 1:-1]
    p7 = p[2:, :-2]
    p8 = p[1:-1, :-2]
    p9 = p[:-2, :-2]
    ring = (p2, p3, p4, p5, p6, p7, p8, p9)

    b = np.zeros(grid.shape, dtype=np.int32)
    for q in ring:
        b += q
    a = np.zeros(grid.shape, dtype=np.int32)
    for i in range(8):
        a += (ring[i] == 0) & (ring[(i + 1) % 8] == 1)

    cond = (grid == 1) & (b >= 2) & (b <= 6) & (a == 1)
    if first:
        cond &= (p2 * p4 * p6 == 0) & (p4 * p6 * p8 == 0)
    else:
        cond &= (p2 * p4 * p8 == 0) & (p2 * p6 * p8 == 0)
    return cond


def thin(grid: np.ndarray) -> np.ndarray:
    """Zhang-Suen thinning to a fixed point. grid: uint8 0/1, returns a copy."""
    out = np.array(grid, dtype=np.uint8, copy=True)
    while True:
        d1 = _subpass_deletions(out, first=True)
        out[d1] = 0
        d2 = _subpass_deletions(out, first=False)
        out[d2] = 0
        if not (d1.any() or d2.any()):
            return out


def march(
    grid: np.ndarray,
    px: float,
    py: float,
    nx: float,
    ny: float,
    step: float,
) -> tuple[float, float, float, float]:
    """March from (px, py) along +/-(nx, ny) in `step` increments.

    Samples the nearest pixel (floor(v + 0.5)) at each position and stops a
    side when the sample leaves the foreground or the grid. Returns the last
    interior positions (ax, ay) on the + side and (bx, by) on the - side.
    """
    h, w = grid.shape
    dx = nx * step
    dy = ny * step

    ax, ay = px, py
    x, y = px, py
    while True:
        x += dx
        y += dy
        cx = math.floor(x + 0.5)
        cy = math.floor(y + 0.5)
        if cx < 0 or cx >= w or cy < 0 or cy >= h or grid[cy, cx] == 0:
            break
        ax, ay = x, y

    bx, by = px, py
    x, y = px, py
    while True:
        x -= dx
        y -= dy
        cx = math.floor(x + 0.5)
        cy = math.floor(y + 0.5)
        if cx < 0 or cx >= w or cy < 0 or cy >= h or grid[cy, cx] == 0:
            break
        bx, by = x, y

    return ax, ay, bx, by
