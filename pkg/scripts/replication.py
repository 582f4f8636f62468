#!/usr/bin/env python3
"""Desk-scale replication harness.

Runs the full pipeline over a photo set (procedural samples are generated when
no directory is given), sweeps salt-and-pepper noise and Gaussian blur, and
prints the replication verdicts:

  * Zipf and Heaps R^2 >= 0.9 on the unperturbed ROIs
  * median Benford R^2 below both Zipf and Heaps medians at baseline
  * Benford R^2 trending down (Spearman rho < 0) along both sweep axes
  * total runtime under 30 minutes

With synthetic (random) weights the absolute R^2 targets are not expected to
hold; the point of the harness is that it runs end to end and reports honestly.
Point --weights at an exported pretrained bank to evaluate the real claim.

Usage:
  python3 scripts/replication.py --weights DIR/manifest.json --out DIR
          [--images DIR] [--count 9] [--jobs 4] [--heaps-iters 100]
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from lexivis import LoadedWeights, save_image  # noqa: E402
from lexivis.lexicon import ThresholdSpec  # noqa: E402
from lexivis.report import run_sweep  # noqa: E402
from lexivis.synth import generate_sample_image  # noqa: E402

SALT_LEVELS = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5]
BLUR_LEVELS = [3, 5, 7, 9, 11]


def verdict(name: str, ok: bool, detail: str) -> bool:
    print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
    return ok


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--weights", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--images", help="directory of photos; default: procedural samples")
    parser.add_argument("--count", type=int, default=9)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=4)
    parser.add_argument("--heaps-iters", type=int, default=100)
    args = parser.parse_args()

    t0 = time.perf_counter()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.images:
        images = sorted(
            p for p in Path(args.images).iterdir()
            if p.suffix.lower() in (".png", ".jpg", ".jpeg")
        )[: args.count]
    else:
        sample_dir = out / "samples"
        sample_dir.mkdir(exist_ok=True)
        images = []
        for i in range(args.count):
            path = sample_dir / f"sample_{i:02d}.png"
            if not path.exists():
                save_image(generate_sample_image(seed=args.seed + 100 + i, size=448), path)
            images.append(path)
    if len(images) < 5:
        print(f"need at least 5 images, found {len(images)}", file=sys.stderr)
        return 2

    weights = LoadedWeights.load(args.weights)
    threshold = ThresholdSpec()
    sweeps = {}
    for kind, levels in (("saltpepper", SALT_LEVELS), ("gaussian", BLUR_LEVELS)):
        print(f"== sweep {kind}: {len(images)} images x {len(levels) + 1} levels ==")
        sweeps[kind] = run_sweep(
            images, weights, out / kind,
            kind=kind, levels=levels, threshold=threshold,
            heaps_iterations=args.heaps_iters, seed=args.seed, jobs=args.jobs,
        )

    # baseline statistics come from the identity level of the noise sweep
    base = sweeps["saltpepper"]["results"]["0"]
    zipf = [v["zipf"] for v in base.values() if v["zipf"] is not None]
    heaps = [v["heaps"] for v in base.values() if v["heaps"] is not None]
    benford = [v["benford"] for v in base.values() if v["benford"] is not None]

    print("\n== replication verdicts ==")
    results = [
        verdict("Zipf R^2 >= 0.9 on all unperturbed ROIs",
                len(zipf) >= 5 and min(zipf) >= 0.9,
                f"min {min(zipf):.3f} over {len(zipf)} images"),
        verdict("Heaps R^2 >= 0.9 on all unperturbed ROIs",
                len(heaps) >= 5 and min(heaps) >= 0.9,
                f"min {min(heaps):.3f} over {len(heaps)} images"),
        verdict("median Benford R^2 < median Zipf R^2",
                float(np.median(benford)) < float(np.median(zipf)),
                f"benford {np.median(benford):.3f} vs zipf {np.median(zipf):.3f}"),
        verdict("median Benford R^2 < median Heaps R^2",
                float(np.median(benford)) < float(np.median(heaps)),
                f"benford {np.median(benford):.3f} vs heaps {np.median(heaps):.3f}"),
    ]
    for kind in ("saltpepper", "gaussian"):
        rho = sweeps[kind]["summary"]["spearman_rho"]["benford"]
        results.append(verdict(f"Benford R^2 non-increasing along {kind} levels",
                               rho is not None and rho < 0, f"spearman rho {rho:+.3f}"))
    elapsed = time.perf_counter() - t0
    results.append(verdict("full sweep runtime under 30 minutes",
                           elapsed < 1800, f"{elapsed / 60:.1f} min"))

    summary = {
        "images": [p.name for p in images],
        "weights_digest": weights.manifest.digest,
        "baseline_r_square": {
            "zipf": zipf, "heaps": heaps, "benford": benford,
        },
        "spearman_rho_benford": {
            kind: sweeps[kind]["summary"]["spearman_rho"]["benford"]
            for kind in sweeps
        },
        "elapsed_minutes": round(elapsed / 60, 2),
        "verdicts_passed": sum(results),
        "verdicts_total": len(results),
    }
    (out / "replication_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"\n{sum(results)}/{len(results)} verdicts passed; "
          f"summary written to {out / 'replication_summary.json'}")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
