"""Frame-quality scoring and top-k key-frame selection.

The default scorer is a classical multi-scale Hessian tubularity measure for
dark vessels on a bright background. Per scale, the raw ridge response is
normalized by the peak response the same filter attains on an ideal
calibration tube of matched width, so the 0.15 response threshold and the
0.05 reference coverage are comparable across images. A learned model can
replace it through the external score-file route; selection and metrics do
not care where scores come from.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from .errors import EmptyInputError
from .raster import GrayImage

DEFAULT_SIGMAS = (2.0, 4.0, 6.0)
RESPONSE_THRESHOLD = 0.15
REFERENCE_COVERAGE = 0.05
_BLOB_SUPPRESSION_BETA = 0.5
MIN_FRAME_SIDE = 32


@dataclass(frozen=True)
class FrameScore:
    frame_id: int
    score: float  # [0, 1]


@dataclass(frozen=True)
class ScoreSeries:
    video_id: str
    scores: tuple[FrameScore, ...]

    def __post_init__(self):
        if not self.scores:
            raise EmptyInputError("a score series needs at least one frame")
        ids = [s.frame_id for s in self.scores]
        if any(b <= a for a, b in zip(ids, ids[1:])):
            raise ValueError("frame_ids must be strictly increasing")

    def values(self) -> np.ndarray:
        return np.array([s.score for s in self.scores], dtype=np.float64)


def _ridge_response(img: np.ndarray, sigma: float) -> np.ndarray:
    """Scale-normalized dark-ridge response from Hessian eigenvalues."""
    hxx = ndimage.gaussian_filter(img, sigma, order=(0, 2)) * sigma**2
    hyy = ndimage.gaussian_filter(img, sigma, order=(2, 0)) * sigma**2
    hxy = ndimage.gaussian_filter(img, sigma, order=(1, 1)) * sigma**2
    half_trace = (hxx + hyy) / 2.0
    root = np.sqrt(((hxx - hyy) / 2.0) ** 2 + hxy**2)
    e_lo = half_trace - root
    e_hi = half_trace + root
    # order by magnitude: lam2 is the cross-sectional curvature
    swap = np.abs(e_lo) > np.abs(e_hi)
    lam1 = np.where(swap, e_hi, e_lo)
    lam2 = np.where(swap, e_lo, e_hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(lam2 != 0, lam1 / lam2, 0.0)
    response = np.where(lam2 > 0, lam2, 0.0) * np.exp(-(ratio**2) / (2.0 * _BLOB_SUPPRESSION_BETA**2))
    return response


@lru_cache(maxsize=None)
def _calibration_peak(sigma: float) -> float:
    """Peak ridge response on an ideal full-contrast dark tube of width 2*sigma."""
    size = int(max(64, 16 * sigma))
    img = np.full((size, size), 1.0)
    half = max(1, int(round(sigma)))
    mid = size // 2
    img[mid - half : mid + half, :] = 0.0
    return float(_ridge_response(img, sigma).max())


def vesselness_score(frame: GrayImage, sigma_list: Sequence[float] = DEFAULT_SIGMAS) -> float:
    """Fraction of tubular pixels relative to the 0.05 reference coverage.

    The multi-scale normalized response is thresholded at 0.15; the score is
    ``clamp(coverage / 0.05, 0, 1)``. Constant frames score exactly 0.
    """
    if frame.width < MIN_FRAME_SIDE or frame.height < MIN_FRAME_SIDE:
        raise ValueError(f"frame {frame.width}x{frame.height} smaller than {MIN_FRAME_SIDE}px")
    img = frame.pixels.astype(np.float64) / 255.0
    best = np.zeros_like(img)
    for sigma in sigma_list:
        peak = _calibration_peak(float(sigma))
        np.maximum(best, _ridge_response(img, float(sigma)) / peak, out=best)
    coverage = float((best > RESPONSE_THRESHOLD).mean())
    return min(coverage / REFERENCE_COVERAGE, 1.0)


def score_video(
    frames: Sequence[GrayImage],
    scorer: Callable[[GrayImage], float] = vesselness_score,
    video_id: str = "video",
) -> ScoreSeries:
    """Apply the scorer to every frame in order; frame_id is the ordinal."""
    if not frames:
        raise EmptyInputError("no frames to score")
    scores = []
    for i, frame in enumerate(frames):
        try:
            scores.append(FrameScore(i, float(scorer(frame))))
        except Exception as exc:
            raise RuntimeError(f"scorer failed on frame {i}: {exc}") from exc
    return ScoreSeries(video_id, tuple(scores))


def select_top_k(series: ScoreSeries, k: int = 5) -> list[int]:
    """The k highest-scoring frame_ids, ties to the smaller id.

    Output is ordered by descending score then ascending frame_id; all
    frames are returned when the video has fewer than k.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ranked = sorted(series.scores, key=lambda s: (-s.score, s.frame_id))
    return [s.frame_id for s in ranked[:k]]


# ---------------------------------------------------------------------------
# External score files
# ---------------------------------------------------------------------------

def read_scores_csv(path: str | Path, video_id: str = "video") -> ScoreSeries:
    """Read `frame_id,score` rows (header optional); scores must lie in [0, 1]."""
    rows = []
    text = Path(path).read_text()
    for row in csv.reader(io.StringIO(text)):
        if not row or row[0].strip().lower() == "frame_id":
            continue
        frame_id, score = int(row[0]), float(row[1])
        if not 0.0 <= score <= 1.0:
            raise ValueError(f"score {score} for frame {frame_id} outside [0, 1]")
        rows.append(FrameScore(frame_id, score))
    rows.sort(key=lambda s: s.frame_id)
    return ScoreSeries(video_id, tuple(rows))


def write_scores_csv(series: ScoreSeries, path: str | Path) -> None:
    lines = ["frame_id,score"] + [f"{s.frame_id},{s.score:.6f}" for s in series.scores]
    Path(path).write_text("\n".join(lines) + "\n")


def selection_to_json(series: ScoreSeries, selected: list[int]) -> list[dict]:
    by_id = {s.frame_id: s.score for s in series.scores}
    return [{"frame_id": fid, "score": round(by_id[fid], 6)} for fid in selected]
