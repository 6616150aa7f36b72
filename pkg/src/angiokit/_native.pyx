# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: Zhang-Suen thinning and sub-pixel width marching.

Must stay bit-identical to the pure twins in ``_kernels_py``; the width
march mirrors the same float64 update order and floor(v + 0.5) pixel snap.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()

BACKEND_NAME = "native"


cdef inline int _ring(const unsigned char[:, ::1] g, Py_ssize_t y, Py_ssize_t x,
                      int* p) noexcept nogil:
    # Clockwise from north: P2..P9. Caller guarantees 1 <= y,x < dim-1 via padding.
    p[0] = g[y - 1, x]
    p[1] = g[y - 1, x + 1]
    p[2] = g[y, x + 1]
    p[3] = g[y + 1, x + 1]
    p[4] = g[y + 1, x]
    p[5] = g[y + 1, x - 1]
    p[6] = g[y, x - 1]
    p[7] = g[y - 1, x - 1]
    return 0


cdef Py_ssize_t _subpass(unsigned char[:, ::1] g, unsigned char[:, ::1] flags,
                         bint first) noexcept nogil:
    cdef Py_ssize_t h = g.shape[0], w = g.shape[1]
    cdef Py_ssize_t y, x, i
    cdef Py_ssize_t removed = 0
    cdef int p[8]
    cdef int b, a, c3, c4

    for y in range(1, h - 1):
        for x in range(1, w - 1):
            if g[y, x] == 0:
                flags[y, x] = 0
                continue
            _ring(g, y, x, p)
            b = p[0] + p[1] + p[2] + p[3] + p[4] + p[5] + p[6] + p[7]
            if b < 2 or b > 6:
                flags[y, x] = 0
                continue
            a = 0
            for i in range(8):
                if p[i] == 0 and p[(i + 1) % 8] == 1:
                    a += 1
            if a != 1:
                flags[y, x] = 0
                continue
            if first:
                c3 = p[0] * p[2] * p[4]
                c4 = p[2] * p[4] * p[6]
            else:
                c3 = p[0] * p[2] * p[6]
                c4 = p[0] * p[4] * p[6]
            if c3 == 0 and c4 == 0:
                flags[y, x] = 1
                removed += 1
            else:
                flags[y, x] = 0

    if removed:
        for y in range(1, h - 1):
            for x in range(1, w - 1):
                if flags[y, x]:
                    g[y, x] = 0
    return removed


def thin(cnp.ndarray[cnp.uint8_t, ndim=2] grid):
    """Zhang-Suen thinning to a fixed point. grid: uint8 0/1, returns a copy."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] padded = np.pad(grid, 1).astype(np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] flags = np.zeros_like(padded)
    cdef unsigned char[:, ::1] g = padded
    cdef unsigned char[:, ::1] f = flags
    cdef Py_ssize_t n1, n2
    while True:
        n1 = _subpass(g, f, True)
        n2 = _subpass(g, f, False)
        if n1 == 0 and n2 == 0:
            break
    return np.ascontiguousarray(padded[1:-1, 1:-1])


def march(cnp.ndarray[cnp.uint8_t, ndim=2] grid,
          double px, double py, double nx, double ny, double step):
    """Twin of _kernels_py.march; see there for the contract."""
    cdef const unsigned char[:, ::1] g = grid
    cdef Py_ssize_t h = grid.shape[0], w = grid.shape[1]
    cdef double dx = nx * step, dy = ny * step
    cdef double ax = px, ay = py, bx = px, by = py
    cdef double x = px, y = py
    cdef Py_ssize_t cx, cy

    while True:
        x += dx
        y += dy
        cx = <Py_ssize_t>floor(x + 0.5)
        cy = <Py_ssize_t>floor(y + 0.5)
        if cx < 0 or cx >= w or cy < 0 or cy >= h or g[cy, cx] == 0:
            break
        ax = x
        ay = y

    x = px
    y = py
    while True:
        x -= dx
        y -= dy
        cx = <Py_ssize_t>floor(x + 0.5)
        cy = <Py_ssize_t>floor(y + 0.5)
        if cx < 0 or cx >= w or cy < 0 or cy >= h or g[cy, cx] == 0:
            break
        bx = x
        by = y

    return ax, ay, bx, by
