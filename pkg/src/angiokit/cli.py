"""Command-line interface.

Exit codes: 0 success, 1 stage failure, 2 missing input, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import augment, evaluation, keyframe, phantom, pipeline, profile, skeleton, stenosis
from .errors import AngioKitError, MissingInputError, StageError
from .raster import load_gray, load_mask, save_gray, save_mask

EXIT_OK = 0
EXIT_STAGE = 1
EXIT_MISSING = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; we reserve that
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _parse_canvas(text: str) -> tuple[int, int]:
    w, _, h = text.lower().partition("x")
    return int(w), int(h)


def _parse_sigmas(text: str) -> tuple[float, ...]:
    return tuple(float(s) for s in text.split(","))


def _add_prune_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--min-branch", type=int, default=skeleton.DEFAULT_MIN_BRANCH,
                   help="branch-length pruning threshold (default %(default)s)")
    p.add_argument("--literal-prune", action="store_true",
                   help="remove branches at or above the threshold instead of below")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="angiokit", description="Coronary stenosis quantification from segmentation masks")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("skeletonize", help="thin + prune a mask to an ordered centerline")
    p.add_argument("--mask", required=True, help="input mask raster (PGM/PNG)")
    p.add_argument("--threshold", type=int, default=127, help="foreground threshold (default %(default)s)")
    _add_prune_flags(p)
    p.add_argument("--out-mask", help="write the centerline as a mask file")
    p.add_argument("--out-csv", help="write ordered x,y points (default: stdout)")

    p = sub.add_parser("profile", help="vessel width at every centerline point")
    p.add_argument("--mask", required=True)
    p.add_argument("--threshold", type=int, default=127)
    _add_prune_flags(p)
    p.add_argument("--window", type=int, default=profile.DEFAULT_WINDOW, help="tangent smoothing window (default %(default)s)")
    p.add_argument("--trim", type=int, default=profile.DEFAULT_TRIM, help="points dropped per end (default %(default)s)")
    p.add_argument("--out", help="output CSV path (default: stdout)")

    p = sub.add_parser("assess", help="percent stenosis from width-profile CSVs")
    p.add_argument("--profiles", nargs="+", required=True, metavar="CSV", help="1-5 width-profile CSV files")
    p.add_argument("--k-max", type=int, default=stenosis.DEFAULT_K_MAX, help="widths averaged for the reference (default %(default)s)")
    p.add_argument("--k-min", type=int, default=stenosis.DEFAULT_K_MIN, help="widths averaged for the lesion (default %(default)s)")
    p.add_argument("--image-size", type=_parse_canvas, metavar="WxH", help="clip the lesion box to this size")

    p = sub.add_parser("score", help="score frame quality (vesselness or external file)")
    p.add_argument("--frames", required=True, help="directory of frame_%%04d.pgm files")
    p.add_argument("--scores-file", help="external frame_id,score CSV; bypasses the scorer")
    p.add_argument("--sigmas", type=_parse_sigmas, default=keyframe.DEFAULT_SIGMAS, metavar="S1,S2,...",
                   help="vesselness scales in px (default 2,4,6)")
    p.add_argument("--out", help="output scores CSV (default: stdout)")

    p = sub.add_parser("select", help="pick the top-k frames from a score file")
    p.add_argument("--scores", required=True, help="frame_id,score CSV")
    p.add_argument("--top-k", type=int, default=5)

    p = sub.add_parser("phantom", help="generate a synthetic tube phantom")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--spec", help="TubeSpec/VideoSpec JSON file (overrides geometry flags)")
    p.add_argument("--shape", choices=("straight", "c", "s"), default="straight")
    p.add_argument("--canvas", type=_parse_canvas, default=(256, 256), metavar="WxH")
    p.add_argument("--base-width", type=float, default=20.0)
    p.add_argument("--depth", type=float, default=0.5, help="true stenosis fraction in [0,1)")
    p.add_argument("--center", type=float, default=0.5, help="stenosis center (arc-length fraction)")
    p.add_argument("--extent", type=float, default=0.25, help="stenosis extent (arc-length fraction)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--video", action="store_true", help="also render an angiogram-like frame sequence")
    p.add_argument("--n-frames", type=int, default=60)
    p.add_argument("--rise", type=int, default=15, help="contrast ramp-up frames")
    p.add_argument("--fall", type=int, default=15, help="contrast washout frames")
    p.add_argument("--noise", type=float, default=4.0, help="Gaussian noise sigma")

    p = sub.add_parser("augment", help="write N augmented copies of an image")
    p.add_argument("--image", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--count", "-n", type=int, default=5)
    p.add_argument("--spec", help="AugmentSpec JSON file")
    p.add_argument("--preset", choices=("classification", "segmentation"), default="classification")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("eval", help="metric report from evaluation files")
    p.add_argument("--pairs", help="patient_id,truth,prediction CSV")
    p.add_argument("--selections", help="JSON: [{selected:[...], true_keys:[...]}, ...]")
    p.add_argument("--labels", help="pred,true CSV of key/non-key per frame")

    p = sub.add_parser("split", help="patient-level 4:1 test split + 4 folds")
    p.add_argument("--ids", required=True, help="file with one patient id per line")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("run", help="full pipeline: frames -> key frames -> stenosis report")
    p.add_argument("--config", help="PipelineConfig JSON; explicit flags override it")
    p.add_argument("--frames", help="directory of frame_%%04d.pgm files")
    p.add_argument("--masks", help="directory of mask_%%04d.pgm files")
    p.add_argument("--mask", help="single mask applied to all selected frames")
    p.add_argument("--scores-file", help="external scores CSV")
    p.add_argument("--out", help="output directory")
    p.add_argument("--video-id", default=None)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--min-branch", type=int, default=None)
    p.add_argument("--literal-prune", action="store_true", default=None)
    p.add_argument("--trim", type=int, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--k-min", type=int, default=None)
    p.add_argument("--sigmas", type=_parse_sigmas, default=None, metavar="S1,S2,...")
    p.add_argument("--threshold", type=int, default=None, help="mask foreground threshold")
    p.add_argument("--seed", type=int, default=None)

    return top


# ---------------------------------------------------------------------------
# Subcommand bodies
# ---------------------------------------------------------------------------

def _cmd_skeletonize(args) -> int:
    mask = load_mask(args.mask, threshold=args.threshold)
    centerline = skeleton.centerline_from_mask(mask, min_branch=args.min_branch, literal=args.literal_prune)
    if args.out_mask:
        sk = skeleton.Skeleton(frozenset(centerline.points), mask.width, mask.height)
        save_mask(sk.as_mask(), args.out_mask)
    csv_text = centerline.to_csv()
    if args.out_csv:
        Path(args.out_csv).write_text(csv_text)
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


def _compute_profile(args) -> profile.WidthProfile:
    mask = load_mask(args.mask, threshold=args.threshold)
    from .raster import largest_component

    blob = largest_component(mask)
    centerline = skeleton.centerline_from_mask(mask, min_branch=args.min_branch, literal=args.literal_prune)
    return profile.width_profile(blob, centerline, window=args.window, trim=args.trim)


def _cmd_profile(args) -> int:
    prof = _compute_profile(args)
    if args.out:
        Path(args.out).write_text(prof.to_csv())
    else:
        sys.stdout.write(prof.to_csv())
    return EXIT_OK


def _cmd_assess(args) -> int:
    stats = []
    for i, path in enumerate(args.profiles):
        if not Path(path).exists():
            raise MissingInputError(f"profile file not found: {path}")
        prof = profile.WidthProfile.from_csv(Path(path).read_text())
        stats.append(stenosis.frame_stats(prof, k_max=args.k_max, k_min=args.k_min, frame_id=i))
    result = stenosis.assess(stats, image_size=args.image_size)
    json.dump(result.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_score(args) -> int:
    if args.scores_file:
        series = keyframe.read_scores_csv(args.scores_file)
    else:
        frames = pipeline.list_frames(args.frames)
        if not frames:
            raise MissingInputError(f"no frames found in {args.frames}")
        images = [load_gray(p) for _, p in frames]
        scored = keyframe.score_video(images, scorer=lambda f: keyframe.vesselness_score(f, sigma_list=args.sigmas))
        series = keyframe.ScoreSeries(
            "video", tuple(keyframe.FrameScore(frames[s.frame_id][0], s.score) for s in scored.scores)
        )
    lines = ["frame_id,score"] + [f"{s.frame_id},{s.score:.6f}" for s in series.scores]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_select(args) -> int:
    series = keyframe.read_scores_csv(args.scores)
    selected = keyframe.select_top_k(series, k=args.top_k)
    json.dump(keyframe.selection_to_json(series, selected), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_phantom(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    canvas = tuple(args.canvas)

    video_spec = None
    if args.spec:
        data = json.loads(Path(args.spec).read_text())
        if "tube" in data:
            video_spec = phantom.VideoSpec.from_dict(data)
            tube = video_spec.tube
        else:
            tube = phantom.TubeSpec.from_dict(data)
    else:
        tube = phantom.TubeSpec(
            control_points=phantom.shape_control_points(args.shape, canvas),
            base_width=args.base_width,
            stenosis_center=args.center,
            stenosis_depth=args.depth,
            stenosis_extent=args.extent,
            seed=args.seed,
        )

    mask, field = phantom.render_mask(tube, canvas)
    save_mask(mask, out_dir / "mask.pgm")
    (out_dir / "width_field.csv").write_text(field.to_csv())
    (out_dir / "tube_spec.json").write_text(json.dumps(tube.to_dict(), indent=2) + "\n")

    if args.video or video_spec is not None:
        if video_spec is None:
            envelope = phantom.ramp_plateau_washout(args.n_frames, args.rise, args.fall)
            video_spec = phantom.VideoSpec(tube, args.n_frames, envelope, noise_sigma=args.noise)
        for i, frame in enumerate(phantom.render_video(video_spec, canvas)):
            save_gray(frame, out_dir / (pipeline.FRAME_PATTERN % i))
    return EXIT_OK


def _cmd_augment(args) -> int:
    img = load_gray(args.image)
    if args.spec:
        spec = augment.load_augment_spec(args.spec)
    elif args.preset == "segmentation":
        spec = augment.AugmentSpec.segmentation(seed=args.seed)
    else:
        spec = augment.AugmentSpec.classification(seed=args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sampler = augment.AugmentSampler(spec)
    for i in range(args.count):
        out = augment.apply_params(img, sampler.sample())
        save_gray(out, out_dir / f"aug_{i:04d}.pgm")
    return EXIT_OK


def _cmd_eval(args) -> int:
    pairs = evaluation.read_pairs_csv(args.pairs) if args.pairs else None
    per_video = None
    if args.selections:
        raw = json.loads(Path(args.selections).read_text())
        per_video = [(entry["selected"], set(entry["true_keys"])) for entry in raw]
    labels = None
    if args.labels:
        truthy = ("key", "1", "true")
        pred, true = [], []
        for line in Path(args.labels).read_text().strip().splitlines():
            a, b = line.split(",")
            if a.strip().lower() == "pred":
                continue
            pred.append(a.strip().lower() in truthy)
            true.append(b.strip().lower() in truthy)
        labels = (pred, true)
    if pairs is None and per_video is None and labels is None:
        raise MissingInputError("eval needs --pairs, --selections or --labels")
    json.dump(evaluation.metrics_report(pairs, per_video, labels), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_split(args) -> int:
    ids = [ln.strip() for ln in Path(args.ids).read_text().splitlines() if ln.strip()]
    plan = evaluation.make_splits(ids, seed=args.seed)
    sys.stdout.write(plan.to_json())
    return EXIT_OK


def _cmd_run(args) -> int:
    overrides = dict(
        frames_dir=args.frames,
        masks_dir=args.masks,
        mask_file=args.mask,
        scores_file=args.scores_file,
        out_dir=args.out,
        video_id=args.video_id,
        top_k=args.top_k,
        min_branch=args.min_branch,
        literal_prune=args.literal_prune,
        trim=args.trim,
        window=args.window,
        k_max=args.k_max,
        k_min=args.k_min,
        sigmas=args.sigmas,
        mask_threshold=args.threshold,
        seed=args.seed,
    )
    if args.config:
        cfg = pipeline.PipelineConfig.from_json(args.config, **overrides)
    else:
        missing = [name for name, key in (("--frames", "frames_dir"), ("--out", "out_dir")) if overrides[key] is None]
        if missing:
            raise MissingInputError(f"required without --config: {', '.join(missing)}")
        if overrides["masks_dir"] is None and overrides["mask_file"] is None:
            raise MissingInputError("required without --config: --masks or --mask")
        clean = {k: v for k, v in overrides.items() if v is not None}
        cfg = pipeline.PipelineConfig(**clean)
    report = pipeline.run_pipeline(cfg)
    sys.stdout.write(f"report written to {Path(cfg.out_dir) / 'report.json'} (percent={report['percent']})\n")
    return EXIT_OK


_COMMANDS = {
    "skeletonize": _cmd_skeletonize,
    "profile": _cmd_profile,
    "assess": _cmd_assess,
    "score": _cmd_score,
    "select": _cmd_select,
    "phantom": _cmd_phantom,
    "augment": _cmd_augment,
    "eval": _cmd_eval,
    "split": _cmd_split,
    "run": _cmd_run,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except MissingInputError as exc:
        sys.stderr.write(f"angiokit: missing input: {exc}\n")
        return EXIT_MISSING
    except FileNotFoundError as exc:
        sys.stderr.write(f"angiokit: missing input: {exc}\n")
        return EXIT_MISSING
    except StageError as exc:
        sys.stderr.write(f"angiokit: {exc}\n")
        return EXIT_STAGE
    except (AngioKitError, ValueError, OSError) as exc:
        sys.stderr.write(f"angiokit: error: {exc}\n")
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
