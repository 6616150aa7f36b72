"""Core raster types (grayscale images, binary masks, points) and file I/O.

Coordinate convention used everywhere in this package: origin at the top
left, ``x`` is the column index, ``y`` is the row index. Pixel data is
stored row-major in ``(height, width)`` numpy arrays.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Union

import numpy as np
from scipy import ndimage

from .errors import EmptyMaskError, OutOfBoundsError, PgmFormatError


class Point(NamedTuple):
    """A pixel location: x = column, y = row."""

    x: int
    y: int


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale raster."""

    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        arr = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-D grid, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class Mask:
    """Binary foreground mask over a raster grid."""

    pixels: np.ndarray  # (height, width) bool

    def __post_init__(self):
        arr = np.ascontiguousarray(self.pixels, dtype=bool)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-D grid, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def count(self) -> int:
        """Number of foreground pixels."""
        return int(self.pixels.sum())

    def contains(self, p: Point) -> bool:
        return 0 <= p.x < self.width and 0 <= p.y < self.height

    def to_points(self) -> set[Point]:
        ys, xs = np.nonzero(self.pixels)
        return {Point(int(x), int(y)) for x, y in zip(xs, ys)}


# ---------------------------------------------------------------------------
# PGM / PNG I/O
# ---------------------------------------------------------------------------

_PGM_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    if not data.startswith(b"P5"):
        raise PgmFormatError(f"{path}: not a binary PGM (missing P5 magic)")
    pos = 2
    fields = []
    while len(fields) < 3:
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise PgmFormatError(f"{path}: truncated PGM header")
        fields.append(m.group(1))
        pos = m.end()
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError:
        raise PgmFormatError(f"{path}: non-numeric PGM header fields {fields!r}") from None
    if width <= 0 or height <= 0:
        raise PgmFormatError(f"{path}: invalid dimensions {width}x{height}")
    if maxval != 255:
        raise PgmFormatError(f"{path}: only maxval 255 supported, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    expected = width * height
    raw = data[pos : pos + expected]
    if len(raw) != expected:
        raise PgmFormatError(f"{path}: expected {expected} pixel bytes, got {len(raw)}")
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width)


def _write_pgm(path: Path, arr: np.ndarray) -> None:
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + np.ascontiguousarray(arr, dtype=np.uint8).tobytes())


def _read_png(path: Path) -> np.ndarray:
    from PIL import Image  # optional dependency, only needed for PNG

    with Image.open(path) as im:
        if im.mode != "L":
            im = im.convert("L")
        return np.asarray(im, dtype=np.uint8)


def _write_png(path: Path, arr: np.ndarray) -> None:
    from PIL import Image

    Image.fromarray(np.ascontiguousarray(arr, dtype=np.uint8), mode="L").save(path)


def load_gray(path: str | Path) -> GrayImage:
    """Load an 8-bit grayscale image (binary PGM, or PNG when Pillow is present)."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        return GrayImage(_read_png(path))
    return GrayImage(_read_pgm(path))


def save_gray(img: GrayImage, path: str | Path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".png":
        _write_png(path, img.pixels)
    else:
        _write_pgm(path, img.pixels)


def load_mask(path: str | Path, threshold: int = 127) -> Mask:
    """Load a raster file as a binary mask: foreground iff intensity > threshold."""
    return Mask(load_gray(path).pixels > threshold)


def save_mask(mask: Mask, path: str | Path) -> None:
    """Write a mask as a P5 PGM with values exactly 0 and 255."""
    arr = np.where(mask.pixels, np.uint8(255), np.uint8(0))
    path = Path(path)
    if path.suffix.lower() == ".png":
        _write_png(path, arr)
    else:
        _write_pgm(path, arr)


# ---------------------------------------------------------------------------
# Connectivity queries
# ---------------------------------------------------------------------------

_OFFSETS8 = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))

_STRUCT8 = np.ones((3, 3), dtype=bool)


def neighbors8(grid: Union[Mask, Iterable[Point]], p: Point) -> list[Point]:
    """Foreground (or member) points among the 8 cells surrounding p, excluding p.

    ``grid`` may be a Mask or any collection of Points. For a Mask, p must lie
    inside its bounds.
    """
    if isinstance(grid, Mask):
        if not grid.contains(p):
            raise OutOfBoundsError(f"{p} outside {grid.width}x{grid.height} grid")
        out = []
        for dx, dy in _OFFSETS8:
            x, y = p.x + dx, p.y + dy
            if 0 <= x < grid.width and 0 <= y < grid.height and grid.pixels[y, x]:
                out.append(Point(x, y))
        return out
    members = grid if isinstance(grid, (set, frozenset)) else set(grid)
    return [Point(p.x + dx, p.y + dy) for dx, dy in _OFFSETS8 if Point(p.x + dx, p.y + dy) in members]


def connected_components(mask: Mask) -> list[set[Point]]:
    """Partition foreground pixels into 8-connected components.

    Components are returned largest first; ties broken by the smallest (y, x)
    member so the order is deterministic.
    """
    labels, n = ndimage.label(mask.pixels, structure=_STRUCT8)
    comps = []
    for i in range(1, n + 1):
        ys, xs = np.nonzero(labels == i)
        comps.append({Point(int(x), int(y)) for x, y in zip(xs, ys)})
    comps.sort(key=lambda c: (-len(c), min((p.y, p.x) for p in c)))
    return comps


def largest_component(mask: Mask) -> Mask:
    """Keep only the largest 8-connected foreground component.

    Small islands are treated as segmentation noise; the stenosis pipeline
    assumes a single main vessel blob.
    """
    if mask.count() == 0:
        raise EmptyMaskError("mask has no foreground pixels")
    labels, n = ndimage.label(mask.pixels, structure=_STRUCT8)
    if n == 1:
        return mask
    sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=np.arange(1, n + 1))
    keep = int(np.argmax(sizes)) + 1
    return Mask(labels == keep)
