"""Percent-stenosis estimation from per-frame width profiles.

The reference (non-pathological) width of a frame is the mean of its 30
largest point widths; the lesion width is the mean of the 3 smallest,
assuming a focal narrowing. Percent stenosis for a video is
(1 - mean(min widths) / mean(max widths)) x 100 across its analyzed frames.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean

from .errors import EmptyInputError
from .profile import WidthProfile
from .raster import Point

DEFAULT_K_MAX = 30
DEFAULT_K_MIN = 3
BOX_SIDE = 64

SEVERE_THRESHOLD = 70.0
MODERATE_THRESHOLD = 50.0


@dataclass(frozen=True)
class FrameWidthStats:
    """Width statistics of a single analyzed frame."""

    frame_id: int
    max_mean: float  # mean of the k_max largest widths (reference width)
    min_mean: float  # mean of the k_min smallest widths (lesion width)
    min_location: Point  # centerline point of the single smallest width


@dataclass(frozen=True)
class LesionBox:
    """Axis-aligned square highlighting the lesion, clipped to the image."""

    x: int  # top-left column
    y: int  # top-left row
    side: int


@dataclass(frozen=True)
class StenosisAssessment:
    percent: float  # [0, 100]
    severity: str  # severe | moderate | mild
    location: Point
    box: LesionBox
    per_frame: tuple[FrameWidthStats, ...]

    def to_dict(self) -> dict:
        return {
            "percent": round(self.percent, 4),
            "severity": self.severity,
            "location": {"x": self.location.x, "y": self.location.y},
            "box": {"x": self.box.x, "y": self.box.y, "side": self.box.side},
            "frames": [
                {
                    "frame_id": f.frame_id,
                    "max_mean": round(f.max_mean, 4),
                    "min_mean": round(f.min_mean, 4),
                    "min_location": {"x": f.min_location.x, "y": f.min_location.y},
                }
                for f in self.per_frame
            ],
        }


def frame_stats(
    p: WidthProfile,
    k_max: int = DEFAULT_K_MAX,
    k_min: int = DEFAULT_K_MIN,
    frame_id: int = 0,
) -> FrameWidthStats:
    """Per-frame width statistics; k_max/k_min clamp to the profile size.

    The minimum location is the point of the single smallest width, ties
    broken by the smaller centerline index.
    """
    if len(p) == 0:
        raise EmptyInputError("empty width profile")
    widths = [e.width for e in p.entries]
    ordered = sorted(widths)
    n = len(ordered)
    min_mean = fmean(ordered[: min(k_min, n)])
    max_mean = fmean(ordered[n - min(k_max, n) :])
    best = min(p.entries, key=lambda e: (e.width, e.index))
    return FrameWidthStats(frame_id=frame_id, max_mean=max_mean, min_mean=min_mean, min_location=best.point)


def classify_severity(percent: float) -> str:
    """Clinical binarization: severe >= 70, moderate in [50, 70), else mild.

    A percent exactly at a threshold belongs to the higher class.
    """
    if not 0.0 <= percent <= 100.0:
        raise ValueError(f"percent stenosis {percent} outside [0, 100]")
    if percent >= SEVERE_THRESHOLD:
        return "severe"
    if percent >= MODERATE_THRESHOLD:
        return "moderate"
    return "mild"


def _median_frame(stats: list[FrameWidthStats]) -> FrameWidthStats:
    # Lower median for even counts; resists single-frame segmentation glitches.
    ranked = sorted(stats, key=lambda s: (s.min_mean, s.frame_id))
    return ranked[(len(ranked) - 1) // 2]


def assess(
    stats: list[FrameWidthStats],
    image_size: tuple[int, int] | None = None,
) -> StenosisAssessment:
    """Combine 1-5 frames into a percent-stenosis assessment.

    Per-frame max/min widths are averaged across frames before taking the
    quotient. The lesion location is the minimum-width point of the frame
    whose min_mean is the median; the 64-px lesion box is clipped to
    ``image_size`` (width, height) when given.
    """
    if not stats:
        raise EmptyInputError("no frame statistics to assess")
    if len(stats) > 5:
        raise ValueError(f"assess takes at most 5 frames, got {len(stats)}")
    avg_min = fmean(s.min_mean for s in stats)
    avg_max = fmean(s.max_mean for s in stats)
    percent = (1.0 - avg_min / avg_max) * 100.0
    location = _median_frame(stats).min_location

    half = BOX_SIDE // 2
    bx, by = location.x - half, location.y - half
    side = BOX_SIDE
    if image_size is not None:
        w, h = image_size
        side = min(BOX_SIDE, w, h)
        bx = max(0, min(bx, w - side))
        by = max(0, min(by, h - side))
    return StenosisAssessment(
        percent=percent,
        severity=classify_severity(percent),
        location=location,
        box=LesionBox(bx, by, side),
        per_frame=tuple(stats),
    )


def aggregate_views(a: StenosisAssessment, b: StenosisAssessment) -> StenosisAssessment:
    """Multi-view aggregation: keep the view with the larger percent (tie -> first)."""
    winner = a if a.percent >= b.percent else b
    return StenosisAssessment(
        percent=winner.percent,
        severity=classify_severity(winner.percent),
        location=winner.location,
        box=winner.box,
        per_frame=winner.per_frame,
    )
