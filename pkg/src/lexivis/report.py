"""Report assembly: run the pipeline on images, emit JSON reports and CSV series.

Reports are deterministic for fixed (image, weights, flags, seed): the JSON
key order is fixed and floats are serialized with ``repr``, so re-running
produces identical bytes except for the wall-clock ``timings`` block (which
fit-only reports omit entirely).
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DegenerateFitError
from .images import (
    PerturbationSpec,
    apply_perturbation,
    auto_roi,
    crop_roi,
    load_image,
    save_image,
    to_input_tensor,
)
from .laws import (
    BenfordResult,
    HeapsResult,
    ZipfResult,
    benford_analysis,
    heaps_analysis,
    spearman_rho,
    zipf_analysis,
)
from .lexicon import ThresholdSpec, WordCountTable, extract_lexicon
from .network import forward_collect
from .weights import LoadedWeights

__all__ = [
    "REPORT_SCHEMA_VERSION",
    "LawSections",
    "fit_all_laws",
    "analyze_image",
    "fit_counts_file",
    "run_sweep",
    "write_report",
]

REPORT_SCHEMA_VERSION = 1
_LAWS = ("zipf", "heaps", "benford")


@dataclass(frozen=True)
class LawSections:
    """JSON-ready law sections plus the series needed for the CSV sidecars."""

    sections: dict
    zipf: ZipfResult | None
    heaps: HeapsResult | None
    benford: BenfordResult | None

    def r_square(self, law: str):
        section = self.sections[law]
        return None if "degenerate" in section else section["r_square"]


def fit_all_laws(table: WordCountTable, heaps_iterations: int = 100, seed: int = 0) -> LawSections:
    """Fit the three laws, mapping degenerate inputs to explicit markers."""
    sections = {}
    zipf = heaps = benford = None
    try:
        zipf = zipf_analysis(table)
        sections["zipf"] = {
            "alpha": zipf.alpha,
            "slope": zipf.fit.slope,
            "intercept": zipf.fit.intercept,
            "r_square": zipf.fit.r_square,
            "n_points": zipf.fit.n_points,
        }
    except DegenerateFitError as e:
        sections["zipf"] = {"degenerate": str(e)}
    try:
        heaps = heaps_analysis(table, iterations=heaps_iterations, seed=seed)
        sections["heaps"] = {
            "k": heaps.k,
            "beta": heaps.beta,
            "slope": heaps.fit.slope,
            "intercept": heaps.fit.intercept,
            "r_square": heaps.fit.r_square,
            "n_points": heaps.fit.n_points,
            "iterations": heaps.iterations,
            "best_seed": heaps.best_seed,
            "r_square_mean": heaps.r_square_mean,
            "r_square_std": heaps.r_square_std,
        }
    except DegenerateFitError as e:
        sections["heaps"] = {"degenerate": str(e)}
    try:
        benford = benford_analysis(table)
        sections["benford"] = {
            "r_square": benford.r_square,
            "observed": [float(v) for v in benford.observed],
            "expected": [float(v) for v in benford.expected],
            "layer_totals": [int(v) for v in benford.layer_totals],
        }
    except DegenerateFitError as e:
        sections["benford"] = {"degenerate": str(e)}
    return LawSections(sections=sections, zipf=zipf, heaps=heaps, benford=benford)


def _write_law_csvs(out_dir: Path, image_id: str, laws: LawSections):
    zipf_path = out_dir / f"zipf_{image_id}.csv"
    lines = ["rank,count"]
    if laws.zipf is not None:
        lines += [f"{r},{c}" for r, c in enumerate(laws.zipf.ranked_counts, start=1)]
    zipf_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    heaps_path = out_dir / f"heaps_{image_id}.csv"
    lines = ["n,V"]
    if laws.heaps is not None:
        lines += [f"{n},{v}" for v, n in enumerate(laws.heaps.best_curve, start=1)]
    heaps_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    benford_path = out_dir / f"benford_{image_id}.csv"
    lines = ["position,observed,expected"]
    if laws.benford is not None:
        lines += [
            f"{d},{o!r},{e!r}"
            for d, (o, e) in enumerate(zip(laws.benford.observed, laws.benford.expected), start=1)
        ]
    benford_path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_report(report: dict, path: Path):
    Path(path).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")


def _base_report(image_id: str, threshold: ThresholdSpec | None, capture: str | None) -> dict:
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "engine_version": __version__,
        "image_id": image_id,
    }
    if capture is not None:
        report["capture"] = capture
    report["threshold"] = threshold.as_dict() if threshold is not None else None
    return report


def analyze_image(
    image_path,
    weights: LoadedWeights,
    out_dir,
    *,
    roi: tuple[int, int] | None = None,
    threshold: ThresholdSpec = ThresholdSpec(),
    perturbation: PerturbationSpec | None = None,
    heaps_iterations: int = 100,
    seed: int = 0,
    capture: str = "post_relu",
    image_id: str | None = None,
    dump_roi: bool = False,
) -> dict:
    """Run the full pipeline on one image and write its report and CSV series.

    Returns the report dict.  ``roi=None`` selects the deterministic default
    window (short side scaled to 224, center crop).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    image_path = Path(image_path)
    if image_id is None:
        image_id = image_path.stem

    timings = {}
    t0 = time.perf_counter()
    img = load_image(image_path)
    timings["decode_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    window = auto_roi(img) if roi is None else crop_roi(img, roi[0], roi[1])
    window = apply_perturbation(window, perturbation)
    if dump_roi:
        save_image(window, out_dir / f"roi_{image_id}.png")
    tensor = to_input_tensor(window, weights.manifest.normalization)
    timings["preprocess_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    fms = forward_collect(tensor, weights, capture=capture)
    timings["forward_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    table = extract_lexicon(
        fms, threshold, image_id=image_id,
        perturbation=perturbation.as_dict() if perturbation else None,
    )
    timings["lexicon_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    laws = fit_all_laws(table, heaps_iterations=heaps_iterations, seed=seed)
    timings["fit_s"] = time.perf_counter() - t0

    report = _base_report(image_id, threshold, capture)
    report["source"] = str(image_path)
    report["roi"] = {"x": roi[0], "y": roi[1]} if roi else {"policy": "auto_center"}
    report["perturbation"] = perturbation.as_dict() if perturbation else None
    report["heaps_iterations"] = heaps_iterations
    report["seed"] = seed
    report["weights_digest"] = weights.manifest.digest
    report.update(laws.sections)
    report["timings"] = {k: round(v, 6) for k, v in timings.items()}

    table.to_csv(out_dir / f"counts_{image_id}.csv")
    _write_law_csvs(out_dir, image_id, laws)
    write_report(report, out_dir / f"report_{image_id}.json")
    return report


def fit_counts_file(
    counts_csv,
    out_dir,
    *,
    heaps_iterations: int = 100,
    seed: int = 0,
    image_id: str | None = None,
) -> dict:
    """Statistics-only run on a saved counts table; no network, no timings."""
    counts_csv = Path(counts_csv)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if image_id is None:
        image_id = counts_csv.stem
    table = WordCountTable.from_csv(counts_csv)
    laws = fit_all_laws(table, heaps_iterations=heaps_iterations, seed=seed)

    report = _base_report(image_id, None, None)
    report["source"] = str(counts_csv)
    report["perturbation"] = None
    report["heaps_iterations"] = heaps_iterations
    report["seed"] = seed
    report["weights_digest"] = None
    report.update(laws.sections)

    _write_law_csvs(out_dir, image_id, laws)
    write_report(report, out_dir / f"report_{image_id}.json")
    return report


def unique_stems(paths) -> list[str]:
    """File stems, disambiguated by position when two inputs share a name."""
    paths = [Path(p) for p in paths]
    seen: dict[str, int] = {}
    for p in paths:
        seen[p.stem] = seen.get(p.stem, 0) + 1
    stems, used = [], set()
    for p in paths:
        stem = p.stem
        if seen[stem] > 1 or stem in used:
            i = 1
            while f"{stem}_{i}" in used:
                i += 1
            stem = f"{stem}_{i}"
        used.add(stem)
        stems.append(stem)
    return stems


def _identity_level(kind: str) -> float | int:
    return 0.0 if kind == "saltpepper" else 1


def _format_level(kind: str, level) -> str:
    return f"{level:g}" if kind == "saltpepper" else str(int(level))


def run_sweep(
    image_paths,
    weights: LoadedWeights,
    out_dir,
    *,
    kind: str,
    levels,
    threshold: ThresholdSpec = ThresholdSpec(),
    heaps_iterations: int = 100,
    seed: int = 0,
    capture: str = "post_relu",
    jobs: int = 1,
) -> dict:
    """Analyze every (image, level) pair along one perturbation axis.

    The identity level (0 for noise, size 1 otherwise) is always included as
    the baseline.  Noise realizations share the base seed, so successive
    levels are coupled rather than independently drawn.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    image_paths = [Path(p) for p in image_paths]
    stems = unique_stems(image_paths)

    all_levels = sorted({_identity_level(kind)} | set(levels))
    tasks = []
    for path, stem in zip(image_paths, stems):
        for level in all_levels:
            spec = PerturbationSpec(kind=kind, level=level, seed=seed)
            image_id = f"{stem}__{kind}{_format_level(kind, level)}"
            tasks.append((path, stem, level, spec, image_id))

    def run_one(task):
        path, stem, level, spec, image_id = task
        report = analyze_image(
            path, weights, out_dir,
            roi=None, threshold=threshold,
            perturbation=None if spec.is_identity else spec,
            heaps_iterations=heaps_iterations, seed=seed,
            capture=capture, image_id=image_id,
        )
        return level, stem, report

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_one, tasks))
    else:
        outcomes = [run_one(t) for t in tasks]

    results: dict[str, dict] = {}
    for level, stem, report in outcomes:
        level_key = _format_level(kind, level)
        per_level = results.setdefault(level_key, {})
        per_level[stem] = {
            law: (None if "degenerate" in report[law] else report[law]["r_square"])
            for law in _LAWS
        }

    level_keys = [_format_level(kind, lv) for lv in all_levels]
    medians = {law: [] for law in _LAWS}
    for key in level_keys:
        for law in _LAWS:
            vals = [v[law] for v in results[key].values() if v[law] is not None]
            medians[law].append(float(np.median(vals)) if vals else None)

    spearman = {}
    for law in _LAWS:
        pairs = [(lv, med) for lv, med in zip(all_levels, medians[law]) if med is not None]
        if len(pairs) >= 2:
            spearman[law] = spearman_rho([p[0] for p in pairs], [p[1] for p in pairs])
        else:
            spearman[law] = None

    sweep = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "engine_version": __version__,
        "perturbation_kind": kind,
        "levels": level_keys,
        "images": stems,
        "threshold": threshold.as_dict(),
        "capture": capture,
        "seed": seed,
        "weights_digest": weights.manifest.digest,
        "results": results,
        "summary": {
            "median_r_square": medians,
            "spearman_rho": spearman,
        },
    }
    write_report(sweep, out_dir / "sweep.json")

    lines = ["kind,level,images,zipf_median_r2,heaps_median_r2,benford_median_r2"]
    for i, key in enumerate(level_keys):
        cells = [
            "" if medians[law][i] is None else repr(medians[law][i]) for law in _LAWS
        ]
        lines.append(f"{kind},{key},{len(results[key])}," + ",".join(cells))
    (out_dir / "sweep_summary.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return sweep
