"""Synthetic tube phantoms with analytically known geometry.

A phantom is a smooth curve (piecewise cubic through control points,
arc-length parametrized) swept with a width field
``w(t) = base_width * (1 - depth * bump(t))`` where ``bump`` is a raised
cosine over ``stenosis_extent`` centered at ``stenosis_center``. The true
percent stenosis is therefore exactly ``depth * 100``. Everything is
seed-deterministic; nothing reads system entropy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from .errors import GeometryError
from .raster import GrayImage, Mask, Point

BACKGROUND_LEVEL = 200.0
TUBE_CONTRAST = 120.0

_SAMPLES_PER_PX = 4.0


@dataclass(frozen=True)
class TubeSpec:
    control_points: tuple[tuple[float, float], ...]
    base_width: float  # pixels
    stenosis_center: float = 0.5  # arc-length fraction
    stenosis_depth: float = 0.0  # true percent stenosis = depth * 100
    stenosis_extent: float = 0.25  # arc-length fraction covered by the narrowing
    seed: int = 0

    def __post_init__(self):
        if len(self.control_points) < 2:
            raise GeometryError("need at least 2 control points")
        if self.base_width < 4:
            raise GeometryError(f"base_width {self.base_width} < 4 px")
        if not 0.0 <= self.stenosis_depth < 1.0:
            raise GeometryError(f"stenosis_depth {self.stenosis_depth} outside [0, 1)")
        narrowed = self.base_width * (1.0 - self.stenosis_depth)
        if narrowed < 2.0:
            raise GeometryError(f"narrowed width {narrowed:.2f} px < 2 px")
        if not 0.0 <= self.stenosis_center <= 1.0:
            raise GeometryError("stenosis_center outside [0, 1]")
        if not 0.0 < self.stenosis_extent <= 1.0:
            raise GeometryError("stenosis_extent outside (0, 1]")

    @property
    def true_percent(self) -> float:
        return self.stenosis_depth * 100.0

    def to_dict(self) -> dict:
        return {
            "control_points": [list(p) for p in self.control_points],
            "base_width": self.base_width,
            "stenosis_center": self.stenosis_center,
            "stenosis_depth": self.stenosis_depth,
            "stenosis_extent": self.stenosis_extent,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "TubeSpec":
        return TubeSpec(
            control_points=tuple(tuple(p) for p in d["control_points"]),
            base_width=float(d["base_width"]),
            stenosis_center=float(d.get("stenosis_center", 0.5)),
            stenosis_depth=float(d.get("stenosis_depth", 0.0)),
            stenosis_extent=float(d.get("stenosis_extent", 0.25)),
            seed=int(d.get("seed", 0)),
        )


@dataclass(frozen=True)
class VideoSpec:
    tube: TubeSpec
    n_frames: int
    contrast_envelope: tuple[float, ...]  # per-frame multiplier in [0, 1]
    noise_sigma: float = 0.0

    def __post_init__(self):
        if len(self.contrast_envelope) != self.n_frames:
            raise GeometryError("contrast_envelope length must equal n_frames")
        env = np.asarray(self.contrast_envelope, dtype=np.float64)
        if env.size and (env.min() < 0.0 or env.max() > 1.0):
            raise GeometryError("contrast_envelope values outside [0, 1]")
        peak = int(np.argmax(env))
        if np.any(np.diff(env[: peak + 1]) < 0) or np.any(np.diff(env[peak:]) > 0):
            raise GeometryError("contrast_envelope must be unimodal")

    def to_dict(self) -> dict:
        return {
            "tube": self.tube.to_dict(),
            "n_frames": self.n_frames,
            "contrast_envelope": list(self.contrast_envelope),
            "noise_sigma": self.noise_sigma,
        }

    @staticmethod
    def from_dict(d: dict) -> "VideoSpec":
        return VideoSpec(
            tube=TubeSpec.from_dict(d["tube"]),
            n_frames=int(d["n_frames"]),
            contrast_envelope=tuple(float(v) for v in d["contrast_envelope"]),
            noise_sigma=float(d.get("noise_sigma", 0.0)),
        )


@dataclass(frozen=True)
class WidthField:
    """Dense samples of the analytic centerline curve and its width field."""

    t: np.ndarray = field(repr=False)  # (M,) arc-length fractions
    xy: np.ndarray = field(repr=False)  # (M, 2) curve coordinates
    w: np.ndarray = field(repr=False)  # (M,) widths in pixels

    def point_at(self, t: float) -> tuple[float, float]:
        x = float(np.interp(t, self.t, self.xy[:, 0]))
        y = float(np.interp(t, self.t, self.xy[:, 1]))
        return x, y

    def width_at(self, t: float) -> float:
        return float(np.interp(t, self.t, self.w))

    def stenosis_point(self, spec: TubeSpec) -> tuple[float, float]:
        return self.point_at(spec.stenosis_center)

    def widths_near(self, points: list[Point] | np.ndarray) -> np.ndarray:
        """Analytic width at the curve sample nearest to each query point."""
        pts = np.asarray([(p[0], p[1]) for p in points], dtype=np.float64)
        _, idx = cKDTree(self.xy).query(pts)
        return self.w[idx]

    def arc_length(self) -> float:
        deltas = np.diff(self.xy, axis=0)
        return float(np.sqrt((deltas**2).sum(axis=1)).sum())

    def to_csv(self) -> str:
        lines = ["t,x,y,width"]
        for ti, (x, y), wi in zip(self.t, self.xy, self.w):
            lines.append(f"{ti:.6f},{x:.3f},{y:.3f},{wi:.3f}")
        return "\n".join(lines) + "\n"


def _bump(t: np.ndarray, center: float, extent: float) -> np.ndarray:
    """Raised cosine: 1 at center, 0 outside +/- extent/2, C1-smooth."""
    u = (t - center) / (extent / 2.0)
    out = np.zeros_like(t)
    inside = np.abs(u) <= 1.0
    out[inside] = 0.5 * (1.0 + np.cos(np.pi * u[inside]))
    return out


def _sample_curve(spec: TubeSpec) -> WidthField:
    cps = np.asarray(spec.control_points, dtype=np.float64)
    chord = np.concatenate([[0.0], np.cumsum(np.sqrt((np.diff(cps, axis=0) ** 2).sum(axis=1)))])
    if chord[-1] == 0.0:
        raise GeometryError("control points are coincident")
    spline = CubicSpline(chord / chord[-1], cps, axis=0)

    # Oversample, then re-parametrize to arc length.
    coarse = spline(np.linspace(0.0, 1.0, 4096))
    seg = np.sqrt((np.diff(coarse, axis=0) ** 2).sum(axis=1))
    total = float(seg.sum())
    m = max(256, int(total * _SAMPLES_PER_PX))
    cum = np.concatenate([[0.0], np.cumsum(seg)]) / total
    u_of_t = np.interp(np.linspace(0.0, 1.0, m), cum, np.linspace(0.0, 1.0, 4096))
    xy = spline(u_of_t)
    t = np.linspace(0.0, 1.0, m)
    w = spec.base_width * (1.0 - spec.stenosis_depth * _bump(t, spec.stenosis_center, spec.stenosis_extent))
    return WidthField(t=t, xy=xy, w=w)


def render_mask(spec: TubeSpec, canvas: tuple[int, int]) -> tuple[Mask, WidthField]:
    """Rasterize the tube: foreground = pixels within w(t)/2 of the curve.

    Returns the mask together with the densely sampled analytic width field
    used as the verification oracle. Raises GeometryError when the swept
    tube does not fit inside the canvas.
    """
    width, height = canvas
    fieldw = _sample_curve(spec)
    margin = fieldw.w / 2.0 + 1.0
    xs, ys = fieldw.xy[:, 0], fieldw.xy[:, 1]
    if (
        (xs - margin < 0).any()
        or (xs + margin > width - 1).any()
        or (ys - margin < 0).any()
        or (ys + margin > height - 1).any()
    ):
        raise GeometryError("tube (including its width) exits the canvas")

    gx, gy = np.meshgrid(np.arange(width, dtype=np.float64), np.arange(height, dtype=np.float64))
    pix = np.column_stack([gx.ravel(), gy.ravel()])
    dist, idx = cKDTree(fieldw.xy).query(pix)
    inside = dist <= fieldw.w[idx] / 2.0
    return Mask(inside.reshape(height, width)), fieldw


def render_video(spec: VideoSpec, canvas: tuple[int, int]) -> list[GrayImage]:
    """Angiogram-like frame sequence: bright background, tube darkened per frame.

    Frame i is ``BACKGROUND_LEVEL - envelope[i] * TUBE_CONTRAST`` inside the
    tube plus seeded Gaussian noise, clipped to [0, 255].
    """
    width, height = canvas
    mask, _ = render_mask(spec.tube, canvas)
    rng = np.random.default_rng(spec.tube.seed)
    frames = []
    base = np.full((height, width), BACKGROUND_LEVEL, dtype=np.float64)
    for i in range(spec.n_frames):
        img = base.copy()
        img[mask.pixels] -= spec.contrast_envelope[i] * TUBE_CONTRAST
        if spec.noise_sigma > 0:
            img += rng.normal(0.0, spec.noise_sigma, size=img.shape)
        frames.append(GrayImage(np.clip(np.rint(img), 0, 255).astype(np.uint8)))
    return frames


def ramp_plateau_washout(n_frames: int, rise: int, fall: int) -> tuple[float, ...]:
    """Unimodal contrast envelope: linear ramp up, plateau at 1, linear washout."""
    if rise + fall > n_frames:
        raise GeometryError("rise + fall exceeds n_frames")
    env = np.ones(n_frames, dtype=np.float64)
    if rise:
        env[:rise] = np.linspace(0.0, 1.0, rise, endpoint=False)
    if fall:
        env[n_frames - fall :] = np.linspace(1.0, 0.0, fall + 1)[1:]
    return tuple(float(v) for v in env)


def shape_control_points(shape: str, canvas: tuple[int, int]) -> tuple[tuple[float, float], ...]:
    """Control points for the stock curve shapes: straight, c, s.

    The straight tube sits a quarter pixel off the row grid and the C bowl
    is kept gentle (curvature radius well above any stock tube half-width):
    grid-aligned runs and tight bends both amplify rasterization noise in
    the width estimator.
    """
    w, h = canvas
    if shape == "straight":
        y = 0.5 * h + 0.25
        return ((0.12 * w, y), (0.4 * w, y), (0.6 * w, y), (0.88 * w, y))
    if shape == "c":
        return (
            (0.14 * w, 0.36 * h),
            (0.30 * w, 0.54 * h),
            (0.50 * w, 0.60 * h),
            (0.70 * w, 0.54 * h),
            (0.86 * w, 0.36 * h),
        )
    if shape == "s":
        return (
            (0.14 * w, 0.36 * h),
            (0.34 * w, 0.22 * h),
            (0.50 * w, 0.50 * h),
            (0.66 * w, 0.78 * h),
            (0.86 * w, 0.64 * h),
        )
    raise ValueError(f"unknown shape {shape!r}; expected straight, c or s")


def load_tube_spec(path: str | Path) -> TubeSpec:
    return TubeSpec.from_dict(json.loads(Path(path).read_text()))


def load_video_spec(path: str | Path) -> VideoSpec:
    return VideoSpec.from_dict(json.loads(Path(path).read_text()))
