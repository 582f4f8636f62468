"""Command-line front end: analyze images, sweep perturbations, refit saved counts.

Exit codes: 0 when every requested report was produced, 1 when some inputs
failed (failures are listed on stderr), 2 for configuration problems such as
an unreadable weight manifest.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .errors import (
    ConfigurationError,
    CountsFormatError,
    FormatError,
    IntegrityError,
    ManifestError,
)
from .images import PERTURBATION_KINDS, PerturbationSpec, save_image
from .lexicon import ThresholdSpec
from .report import analyze_image, fit_counts_file, run_sweep, unique_stems
from .synth import generate_sample_image, write_synthetic_weights
from .weights import LoadedWeights

_CONFIG_ERRORS = (
    ManifestError,
    IntegrityError,
    FormatError,
    ConfigurationError,
    FileNotFoundError,
    NotADirectoryError,
    ValueError,
)


def _parse_roi(text: str) -> tuple[int, int]:
    try:
        x, y = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"ROI must look like X,Y, got {text!r}")
    return x, y


def _parse_levels(text: str, kind: str) -> list:
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise ValueError("--levels needs at least one value")
    if kind == "saltpepper":
        return [float(s) for s in items]
    return [int(s) for s in items]


def _add_common_analysis_flags(p: argparse.ArgumentParser):
    p.add_argument("--threshold", default="quantile:0.9", metavar="MODE:LEVEL",
                   help="word threshold, e.g. quantile:0.9 or relative_max:0.9")
    p.add_argument("--count-op", choices=("gt", "ge"), default="gt",
                   help="count pixels strictly above (gt) or at-or-above (ge) the threshold")
    p.add_argument("--capture", choices=("post_relu", "pre_relu"), default="post_relu",
                   help="take feature maps after (default) or before each ReLU")
    p.add_argument("--heaps-iters", type=int, default=100, metavar="N",
                   help="number of kernel shuffles for the vocabulary-growth fit")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.add_argument("--jobs", type=int, default=1, metavar="N")
    p.add_argument("--out", default=".", metavar="DIR")


def _threshold_from_args(args) -> ThresholdSpec:
    return ThresholdSpec.parse(args.threshold, strict=(args.count_op == "gt"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexivis",
        description="Word statistics of CNN feature maps: Zipf, Heaps, and Benford fits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="full pipeline on one or more images")
    p.add_argument("--weights", required=True, metavar="MANIFEST")
    p.add_argument("--image", action="append", required=True, metavar="PATH")
    p.add_argument("--roi", action="append", type=_parse_roi, metavar="X,Y",
                   help="explicit 224x224 window; repeat for several windows per image "
                        "(default: scale short side to 224 and center-crop)")
    p.add_argument("--perturb", choices=PERTURBATION_KINDS, metavar="KIND",
                   help="apply one perturbation before analysis (give its --levels value)")
    p.add_argument("--levels", metavar="L", help="single perturbation level for --perturb")
    p.add_argument("--dump-roi", action="store_true", help="save the analyzed ROI as PNG")
    _add_common_analysis_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="analyze images across a perturbation-level grid")
    p.add_argument("--weights", required=True, metavar="MANIFEST")
    p.add_argument("--image", action="append", required=True, metavar="PATH")
    p.add_argument("--perturb", choices=PERTURBATION_KINDS, required=True, metavar="KIND")
    p.add_argument("--levels", required=True, metavar="a,b,c",
                   help="levels to sweep; the identity level is always added as baseline")
    _add_common_analysis_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="refit the three laws from a saved counts CSV")
    p.add_argument("counts_csv", metavar="COUNTS.CSV")
    p.add_argument("--heaps-iters", type=int, default=100, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.add_argument("--out", default=".", metavar="DIR")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("synth-weights", help="write a deterministic synthetic weight bank")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.set_defaults(func=cmd_synth_weights)

    p = sub.add_parser("synth-images", help="write procedural sample photographs")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--count", type=int, default=9, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.add_argument("--size", type=int, default=448, metavar="PIXELS")
    p.set_defaults(func=cmd_synth_images)

    return parser


def _run_tasks(tasks, jobs: int):
    """Run callables, collecting (label, error) failures without aborting the rest."""
    failures = []

    def guarded(task):
        label, fn = task
        try:
            fn()
        except Exception as e:  # noqa: BLE001 - per-input isolation is the point
            return label, e
        return None

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(guarded, tasks))
    else:
        outcomes = [guarded(t) for t in tasks]
    failures = [o for o in outcomes if o is not None]
    return failures


def cmd_analyze(args) -> int:
    threshold = _threshold_from_args(args)
    perturbation = None
    if args.perturb:
        if not args.levels:
            print("error: --perturb needs --levels with exactly one value", file=sys.stderr)
            return 2
        levels = _parse_levels(args.levels, args.perturb)
        if len(levels) != 1:
            print("error: analyze takes a single perturbation level; use sweep for grids",
                  file=sys.stderr)
            return 2
        perturbation = PerturbationSpec(kind=args.perturb, level=levels[0], seed=args.seed)

    weights = LoadedWeights.load(args.weights)

    tasks = []
    for image, stem in zip(args.image, unique_stems(args.image)):
        rois = args.roi if args.roi else [None]
        for roi in rois:
            image_id = stem if roi is None else f"{stem}_roi{roi[0]}x{roi[1]}"
            if perturbation is not None:
                image_id += f"__{perturbation.kind}{perturbation.level:g}"

            def job(image=image, roi=roi, image_id=image_id):
                analyze_image(
                    image, weights, args.out,
                    roi=roi, threshold=threshold, perturbation=perturbation,
                    heaps_iterations=args.heaps_iters, seed=args.seed,
                    capture=args.capture, image_id=image_id, dump_roi=args.dump_roi,
                )

            tasks.append((image_id, job))

    failures = _run_tasks(tasks, args.jobs)
    for label, err in failures:
        print(f"error: {label}: {err}", file=sys.stderr)
    return 1 if failures else 0


def cmd_sweep(args) -> int:
    threshold = _threshold_from_args(args)
    levels = _parse_levels(args.levels, args.perturb)
    for level in levels:
        PerturbationSpec(kind=args.perturb, level=level, seed=args.seed)  # validate early
    weights = LoadedWeights.load(args.weights)
    run_sweep(
        args.image, weights, args.out,
        kind=args.perturb, levels=levels, threshold=threshold,
        heaps_iterations=args.heaps_iters, seed=args.seed,
        capture=args.capture, jobs=args.jobs,
    )
    return 0


def cmd_fit(args) -> int:
    fit_counts_file(args.counts_csv, args.out,
                    heaps_iterations=args.heaps_iters, seed=args.seed)
    return 0


def cmd_synth_weights(args) -> int:
    path = write_synthetic_weights(args.out, seed=args.seed)
    print(path)
    return 0


def cmd_synth_images(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        img = generate_sample_image(seed=args.seed + i, size=args.size)
        save_image(img, out / f"sample_{i:02d}.png")
    print(out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CountsFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except _CONFIG_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
