"""End-to-end orchestration: frames in, stenosis report out.

Stages mirror the analysis workflow: score frames, select the top-k key
frames, reduce each selected frame's mask to an ordered centerline, profile
vessel widths, and combine per-frame statistics into one assessment.
Segmentation masks are inputs (a mask directory keyed by frame id, or a
single mask applied to every selected frame); this artifact does not train
a segmenter.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import keyframe, profile, skeleton, stenosis
from .errors import AngioKitError, MissingInputError, StageError
from .raster import GrayImage, Mask, largest_component, load_gray, load_mask, save_gray

FRAME_PATTERN = "frame_%04d.pgm"
MASK_PATTERN = "mask_%04d.pgm"
_FRAME_RE = re.compile(r"frame_(\d+)\.(pgm|png)$")


@dataclass(frozen=True)
class PipelineConfig:
    frames_dir: str
    out_dir: str
    masks_dir: str | None = None  # mask_%04d keyed by frame id
    mask_file: str | None = None  # one mask applied to all selected frames
    scores_file: str | None = None  # external frame_id,score CSV; bypasses the scorer
    video_id: str = "video"
    top_k: int = 5
    min_branch: int = skeleton.DEFAULT_MIN_BRANCH
    literal_prune: bool = False
    trim: int = profile.DEFAULT_TRIM
    window: int = profile.DEFAULT_WINDOW
    k_max: int = stenosis.DEFAULT_K_MAX
    k_min: int = stenosis.DEFAULT_K_MIN
    sigmas: tuple[float, ...] = keyframe.DEFAULT_SIGMAS
    mask_threshold: int = 127
    seed: int = 0

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.masks_dir is None and self.mask_file is None:
            raise ValueError("either masks_dir or mask_file is required")

    @staticmethod
    def from_json(path: str | Path, **overrides) -> "PipelineConfig":
        """Load a config file; keyword overrides (CLI flags) win."""
        data = json.loads(Path(path).read_text())
        known = {f.name for f in fields(PipelineConfig)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "sigmas" in data:
            data["sigmas"] = tuple(float(s) for s in data["sigmas"])
        cfg = PipelineConfig(**data)
        clean = {k: v for k, v in overrides.items() if v is not None}
        return replace(cfg, **clean) if clean else cfg


def list_frames(frames_dir: str | Path) -> list[tuple[int, Path]]:
    """Numbered frame files in ascending frame-id order."""
    found = []
    for p in sorted(Path(frames_dir).iterdir()):
        m = _FRAME_RE.match(p.name)
        if m:
            found.append((int(m.group(1)), p))
    found.sort(key=lambda t: t[0])
    return found


def _mask_path_for(cfg: PipelineConfig, frame_id: int) -> Path:
    if cfg.mask_file is not None:
        return Path(cfg.mask_file)
    return Path(cfg.masks_dir) / (MASK_PATTERN % frame_id)


def _measure_frame(cfg: PipelineConfig, mask: Mask, frame_id: int) -> tuple[stenosis.FrameWidthStats, profile.WidthProfile]:
    blob = largest_component(mask)
    sk = skeleton.prune(
        skeleton.thin(blob), min_branch=cfg.min_branch, literal=cfg.literal_prune
    )
    path = skeleton.to_single_path(sk)
    centerline = skeleton.order_centerline(path)
    prof = profile.width_profile(blob, centerline, window=cfg.window, trim=cfg.trim)
    stats = stenosis.frame_stats(prof, k_max=cfg.k_max, k_min=cfg.k_min, frame_id=frame_id)
    return stats, prof


def _overlay(mask: Mask, box: stenosis.LesionBox) -> GrayImage:
    """Visualization raster: vessel at 140, lesion box border at 255."""
    canvas = np.where(mask.pixels, np.uint8(140), np.uint8(0))
    x0, y0 = box.x, box.y
    x1, y1 = min(box.x + box.side, mask.width) - 1, min(box.y + box.side, mask.height) - 1
    for t in range(2):
        canvas[np.clip(y0 + t, 0, mask.height - 1), x0 : x1 + 1] = 255
        canvas[np.clip(y1 - t, 0, mask.height - 1), x0 : x1 + 1] = 255
        canvas[y0 : y1 + 1, np.clip(x0 + t, 0, mask.width - 1)] = 255
        canvas[y0 : y1 + 1, np.clip(x1 - t, 0, mask.width - 1)] = 255
    return GrayImage(canvas)


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run all stages and write the report files; returns the report dict.

    Raises MissingInputError when a frame or mask file is absent and
    StageError (tagged with the stage name) for any other stage failure.
    """
    frames = list_frames(cfg.frames_dir)
    if not frames:
        raise MissingInputError(f"no {FRAME_PATTERN % 0}-style frames in {cfg.frames_dir}")

    try:
        if cfg.scores_file is not None:
            series = keyframe.read_scores_csv(cfg.scores_file, video_id=cfg.video_id)
        else:
            images = [load_gray(path) for _, path in frames]
            scorer = lambda f: keyframe.vesselness_score(f, sigma_list=cfg.sigmas)
            scored = keyframe.score_video(images, scorer=scorer, video_id=cfg.video_id)
            # re-key ordinals to the on-disk frame numbering
            series = keyframe.ScoreSeries(
                cfg.video_id,
                tuple(
                    keyframe.FrameScore(frames[s.frame_id][0], s.score) for s in scored.scores
                ),
            )
    except (OSError, AngioKitError, ValueError, RuntimeError) as exc:
        raise StageError("scoring", str(exc)) from exc

    selected = keyframe.select_top_k(series, k=cfg.top_k)

    first_img = load_gray(frames[0][1])
    dims = (first_img.width, first_img.height)

    per_frame = []
    profiles = {}
    masks = {}
    for fid in selected:
        mpath = _mask_path_for(cfg, fid)
        if not mpath.exists():
            raise MissingInputError(f"mask for frame {fid} not found: {mpath}")
        try:
            mask = load_mask(mpath, threshold=cfg.mask_threshold)
            stats, prof = _measure_frame(cfg, mask, fid)
        except MissingInputError:
            raise
        except (OSError, AngioKitError, ValueError) as exc:
            raise StageError("measurement", f"frame {fid}: {exc}") from exc
        per_frame.append(stats)
        profiles[fid] = prof
        masks[fid] = mask

    try:
        assessment = stenosis.assess(per_frame, image_size=dims)
    except (AngioKitError, ValueError) as exc:
        raise StageError("assessment", str(exc)) from exc

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = {
        "video_id": cfg.video_id,
        "selected_frames": selected,
        "scores": [{"frame_id": s.frame_id, "score": round(s.score, 6)} for s in series.scores],
        **assessment.to_dict(),
    }
    (out_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    for fid in selected:
        (out_dir / f"profile_{fid:04d}.csv").write_text(profiles[fid].to_csv())
        save_gray(_overlay(masks[fid], assessment.box), out_dir / f"overlay_{fid:04d}.pgm")
    return report
