"""Seeded image augmentation: affine family, CLAHE, unsharp sharpening.

Parameter ranges default to the key-frame classification recipe; the
segmentation recipe is available as a named preset (it skips CLAHE and
sharpening). The affine composition order is fixed and documented:
scale -> shear -> rotate -> translate, all about the image center.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .raster import GrayImage

Range = tuple[float, float]

AFFINE_FILL = 255.0  # angiograms are bright-background
DEFAULT_TILES = 8


@dataclass(frozen=True)
class AugmentSpec:
    """Sampling ranges for one augmentation policy."""

    rotation: Range = (-20.0, 20.0)  # degrees
    shear: Range = (-8.0, 8.0)  # degrees
    h_translation: Range = (0.0, 0.2)  # fraction of width
    v_translation: Range = (-0.2, 0.2)  # fraction of height
    scale: Range = (0.8, 1.0)
    clahe_clip: Range | None = (1.0, 5.0)  # None = transform not applied
    sharpen_strength: Range | None = (0.4, 0.6)
    seed: int = 0

    def __post_init__(self):
        for name in ("rotation", "shear", "h_translation", "v_translation", "scale", "clahe_clip", "sharpen_strength"):
            rng = getattr(self, name)
            if rng is not None and rng[0] > rng[1]:
                raise ValueError(f"{name} range {rng} has low > high")

    @staticmethod
    def classification(seed: int = 0) -> "AugmentSpec":
        return AugmentSpec(seed=seed)

    @staticmethod
    def segmentation(seed: int = 0) -> "AugmentSpec":
        return AugmentSpec(
            rotation=(-30.0, 30.0),
            shear=(-20.0, 20.0),
            h_translation=(-0.05, 0.05),
            v_translation=(-0.3, 0.3),
            scale=(0.7, 1.3),
            clahe_clip=None,
            sharpen_strength=None,
            seed=seed,
        )

    def to_dict(self) -> dict:
        return {
            "rotation": list(self.rotation),
            "shear": list(self.shear),
            "h_translation": list(self.h_translation),
            "v_translation": list(self.v_translation),
            "scale": list(self.scale),
            "clahe_clip": list(self.clahe_clip) if self.clahe_clip else None,
            "sharpen_strength": list(self.sharpen_strength) if self.sharpen_strength else None,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "AugmentSpec":
        def rng(key, default):
            if key not in d:
                return default
            v = d[key]
            return None if v is None else (float(v[0]), float(v[1]))

        defaults = AugmentSpec()
        return AugmentSpec(
            rotation=rng("rotation", defaults.rotation),
            shear=rng("shear", defaults.shear),
            h_translation=rng("h_translation", defaults.h_translation),
            v_translation=rng("v_translation", defaults.v_translation),
            scale=rng("scale", defaults.scale),
            clahe_clip=rng("clahe_clip", defaults.clahe_clip),
            sharpen_strength=rng("sharpen_strength", defaults.sharpen_strength),
            seed=int(d.get("seed", 0)),
        )


def load_augment_spec(path: str | Path) -> AugmentSpec:
    return AugmentSpec.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class AugmentParams:
    rotation: float
    shear: float
    tx: float
    ty: float
    scale: float
    clahe_clip: float | None
    sharpen_strength: float | None


class AugmentSampler:
    """Draws concrete parameter sets from a spec.

    Holds the only mutable state in this module (the seeded generator);
    use one sampler per concurrent task. Draw order is fixed: rotation,
    shear, tx, ty, scale, clahe, sharpen.
    """

    def __init__(self, spec: AugmentSpec):
        self.spec = spec
        self._rng = np.random.default_rng(spec.seed)

    def sample(self) -> AugmentParams:
        s = self.spec

        def draw(rng: Range | None) -> float | None:
            if rng is None:
                return None
            return float(self._rng.uniform(rng[0], rng[1]))

        return AugmentParams(
            rotation=draw(s.rotation),
            shear=draw(s.shear),
            tx=draw(s.h_translation),
            ty=draw(s.v_translation),
            scale=draw(s.scale),
            clahe_clip=draw(s.clahe_clip),
            sharpen_strength=draw(s.sharpen_strength),
        )


def sample_params(spec: AugmentSpec) -> AugmentParams:
    """First parameter set of a fresh sampler for `spec`."""
    return AugmentSampler(spec).sample()


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------

def apply_affine(
    img: GrayImage,
    rotation: float,
    shear: float,
    tx: float,
    ty: float,
    scale: float,
) -> GrayImage:
    """Affine warp about the image center with bilinear interpolation.

    rotation/shear in degrees, tx/ty as fractions of width/height; pixels
    mapped from outside the canvas are filled with bright background.
    Identity parameters return a bit-identical copy.
    """
    if rotation == 0.0 and shear == 0.0 and tx == 0.0 and ty == 0.0 and scale == 1.0:
        return GrayImage(img.pixels.copy())

    h, w = img.pixels.shape
    theta = math.radians(rotation)
    phi = math.radians(shear)
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    shr = np.array([[1.0, math.tan(phi)], [0.0, 1.0]])
    scl = np.array([[scale, 0.0], [0.0, scale]])
    fwd = rot @ shr @ scl  # acts on (x, y) column vectors

    center = np.array([(w - 1) / 2.0, (h - 1) / 2.0])
    shift = np.array([tx * w, ty * h])
    inv = np.linalg.inv(fwd)

    # ndimage maps output -> input as input = M @ output + offset, in (y, x).
    inv_yx = inv[::-1, ::-1].copy()
    offset_xy = center - inv @ (center + shift)
    warped = ndimage.affine_transform(
        img.pixels.astype(np.float64),
        inv_yx,
        offset=offset_xy[::-1],
        order=1,
        mode="constant",
        cval=AFFINE_FILL,
        prefilter=False,
    )
    return GrayImage(np.clip(np.floor(warped + 0.5), 0, 255).astype(np.uint8))


def _tile_lut(tile: np.ndarray, clip: float | None) -> np.ndarray:
    """Histogram-equalization LUT for one tile, optionally clip-limited.

    Clipping caps each bin at ``clip`` multiples of the uniform level and
    redistributes the excess evenly (integer remainder goes to the lowest
    bins), so the pixel count is preserved exactly.
    """
    hist = np.bincount(tile.ravel(), minlength=256).astype(np.int64)
    area = int(hist.sum())
    if clip is not None:
        limit = max(1, int(clip * area / 256.0))
        excess = int(np.maximum(hist - limit, 0).sum())
        if excess > 0:
            hist = np.minimum(hist, limit)
            hist += excess // 256
            hist[: excess % 256] += 1
    cdf = np.cumsum(hist)
    cdf_min = int(cdf[np.nonzero(hist)[0][0]])
    if area == cdf_min:  # single occupied bin after no redistribution
        return np.arange(256, dtype=np.float64)
    return (cdf - cdf_min) * 255.0 / (area - cdf_min)


def _interpolated_tile_map(img: np.ndarray, clip: float | None, tiles: int) -> np.ndarray:
    """Shared machinery of CLAHE and plain adaptive equalization."""
    h, w = img.shape
    th = -(-h // tiles)  # ceil
    tw = -(-w // tiles)
    padded = np.pad(img, ((0, tiles * th - h), (0, tiles * tw - w)), mode="edge")

    luts = np.empty((tiles, tiles, 256), dtype=np.float64)
    for i in range(tiles):
        for j in range(tiles):
            luts[i, j] = _tile_lut(padded[i * th : (i + 1) * th, j * tw : (j + 1) * tw], clip)

    # Bilinear blend between the four surrounding tile mappings.
    ys = (np.arange(h) + 0.5) / th - 0.5
    xs = (np.arange(w) + 0.5) / tw - 0.5
    yi0 = np.clip(np.floor(ys).astype(int), 0, tiles - 1)
    xi0 = np.clip(np.floor(xs).astype(int), 0, tiles - 1)
    yi1 = np.minimum(yi0 + 1, tiles - 1)
    xi1 = np.minimum(xi0 + 1, tiles - 1)
    wy = np.clip(ys - yi0, 0.0, 1.0)[:, None]
    wx = np.clip(xs - xi0, 0.0, 1.0)[None, :]

    v = img
    m00 = luts[yi0[:, None], xi0[None, :], v]
    m01 = luts[yi0[:, None], xi1[None, :], v]
    m10 = luts[yi1[:, None], xi0[None, :], v]
    m11 = luts[yi1[:, None], xi1[None, :], v]
    out = (1 - wy) * ((1 - wx) * m00 + wx * m01) + wy * ((1 - wx) * m10 + wx * m11)
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def clahe(img: GrayImage, clip: float, tiles: int = DEFAULT_TILES) -> GrayImage:
    """Contrast-limited adaptive histogram equalization.

    ``clip`` is in multiples of the uniform histogram level; tile mappings
    are blended bilinearly, and edge tiles are extended by replication so
    any image size works.
    """
    return GrayImage(_interpolated_tile_map(img.pixels, clip, tiles))


def adaptive_equalize(img: GrayImage, tiles: int = DEFAULT_TILES) -> GrayImage:
    """Plain (unclipped) tile-wise adaptive equalization."""
    return GrayImage(_interpolated_tile_map(img.pixels, None, tiles))


def sharpen(img: GrayImage, strength: float) -> GrayImage:
    """Unsharp mask: img + strength * (img - gaussian_blur(img, sigma=1))."""
    if strength < 0:
        raise ValueError(f"strength must be >= 0, got {strength}")
    if strength == 0.0:
        return GrayImage(img.pixels.copy())
    src = img.pixels.astype(np.float64)
    blurred = ndimage.gaussian_filter(src, sigma=1.0, mode="nearest")
    out = src + strength * (src - blurred)
    return GrayImage(np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8))


def apply_params(img: GrayImage, params: AugmentParams) -> GrayImage:
    """Apply one sampled parameter set: affine, then CLAHE, then sharpening."""
    out = apply_affine(img, params.rotation, params.shear, params.tx, params.ty, params.scale)
    if params.clahe_clip is not None:
        out = clahe(out, params.clahe_clip)
    if params.sharpen_strength is not None:
        out = sharpen(out, params.sharpen_strength)
    return out
