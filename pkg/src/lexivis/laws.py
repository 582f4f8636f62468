"""Rank-frequency, vocabulary-growth, and leading-digit fits for a word-count table.

All three analyses consume a :class:`~lexivis.lexicon.WordCountTable`:

* Zipf: ordinary least squares on (log10 rank, log10 count) over the
  kernels with nonzero counts; the exponent is minus the slope.
* Heaps: kernels are shuffled, tokens accumulated kernel by kernel, and
  V(n) fitted in log-log space; the best of ``iterations`` shuffles by
  R-squared is reported (mean/std across shuffles are kept alongside).
* Benford: per-layer totals, the nine largest matched positionally against
  log10(1 + 1/d); R-squared is measured against that fixed curve, not a
  free regression.

Kernels with zero counts never enter a fit: a word that never occurs is not
part of the text.  Ties are broken by (layer, kernel) so results are
reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .errors import DegenerateFitError
from .lexicon import WordCountTable

__all__ = [
    "FitResult",
    "ZipfResult",
    "HeapsResult",
    "BenfordResult",
    "ols_fit",
    "zipf_analysis",
    "heaps_analysis",
    "benford_analysis",
    "benford_expected",
    "benford_curve",
    "spearman_rho",
    "ZipfLaw",
    "HeapsLaw",
    "BenfordLaw",
]

_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_square: float
    n_points: int


@dataclass(frozen=True)
class ZipfResult:
    """Rank-frequency power-law fit; ``alpha`` is the decay exponent."""

    alpha: float
    fit: FitResult
    ranked_counts: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class HeapsResult:
    """Vocabulary-growth fit V(n) = k * n^beta from the best shuffle."""

    k: float
    beta: float
    fit: FitResult
    best_seed: int
    iterations: int
    r_square_mean: float
    r_square_std: float
    best_curve: np.ndarray = field(repr=False)   # cumulative token counts n_j; V_j = j


@dataclass(frozen=True)
class BenfordResult:
    """Observed top-9 layer-total shares versus the leading-digit curve."""

    observed: np.ndarray
    expected: np.ndarray
    r_square: float
    layer_totals: np.ndarray


def ols_fit(points) -> FitResult:
    """Ordinary least squares line through >= 3 points with variance in x and y."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"points must be an (n, 2) array-like, got shape {pts.shape}")
    n = pts.shape[0]
    if n < 3:
        raise DegenerateFitError(f"need at least 3 points to fit, got {n}")
    x, y = pts[:, 0], pts[:, 1]
    if np.ptp(x) == 0.0:
        raise DegenerateFitError("zero variance in x")
    if np.ptp(y) == 0.0:
        raise DegenerateFitError("zero variance in y")
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    slope = float(dx @ (y - ym) / (dx @ dx))
    intercept = float(ym - slope * xm)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - ym) ** 2).sum())
    return FitResult(slope=slope, intercept=intercept,
                     r_square=1.0 - ss_res / ss_tot, n_points=n)


def _nonzero_in_order(table: WordCountTable):
    mask = table.counts > 0
    return table.layers[mask], table.kernels[mask], table.counts[mask]


def zipf_analysis(table: WordCountTable) -> ZipfResult:
    """Fit log10 count against log10 rank over the nonzero-count kernels."""
    layers, kernels, counts = _nonzero_in_order(table)
    if counts.size < 3:
        raise DegenerateFitError(
            f"Zipf fit needs at least 3 kernels with nonzero counts, got {counts.size}"
        )
    order = np.lexsort((kernels, layers, -counts))
    ranked = counts[order]
    ranks = np.arange(1, ranked.size + 1, dtype=np.float64)
    fit = ols_fit(np.column_stack([np.log10(ranks), np.log10(ranked.astype(np.float64))]))
    return ZipfResult(alpha=-fit.slope, fit=fit, ranked_counts=ranked)


def _heaps_subseed(seed: int, iteration: int) -> int:
    """Deterministic per-iteration seed: splitmix64 step of the base seed."""
    z = (seed + (iteration + 1) * _GOLDEN64) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def heaps_analysis(table: WordCountTable, iterations: int = 100, seed: int = 0) -> HeapsResult:
    """Best-of-``iterations`` vocabulary-growth fit over kernel-level shuffles.

    Each iteration shuffles the nonzero-count kernels with an independent
    sub-seeded generator, accumulates token counts kernel by kernel (the j-th
    distinct kernel contributes all its tokens at once, so V_j = j), and fits
    OLS on (log10 n_j, log10 V_j).  Ties on R-squared resolve to the lowest
    sub-seed, so the result does not depend on evaluation order.
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    _, _, counts = _nonzero_in_order(table)
    m = counts.size
    if m < 3:
        raise DegenerateFitError(
            f"Heaps fit needs at least 3 kernels with nonzero counts, got {m}"
        )
    log_v = np.log10(np.arange(1, m + 1, dtype=np.float64))
    best = None
    r_squares = np.empty(iterations)
    for i in range(iterations):
        sub = _heaps_subseed(seed, i)
        rng = np.random.Generator(np.random.PCG64(sub))
        shuffled = counts[rng.permutation(m)]
        cumulative = np.cumsum(shuffled)
        fit = ols_fit(np.column_stack([np.log10(cumulative.astype(np.float64)), log_v]))
        r_squares[i] = fit.r_square
        key = (-fit.r_square, sub)
        if best is None or key < best[0]:
            best = (key, fit, sub, cumulative)
    _, fit, sub, cumulative = best
    return HeapsResult(
        k=10.0 ** fit.intercept,
        beta=fit.slope,
        fit=fit,
        best_seed=sub,
        iterations=iterations,
        r_square_mean=float(r_squares.mean()),
        r_square_std=float(r_squares.std()),
        best_curve=cumulative,
    )


def benford_expected(d: int) -> float:
    """Probability of leading digit ``d`` under the leading-digit law."""
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool) or not 1 <= d <= 9:
        raise ValueError(f"digit must be an integer in 1..9, got {d!r}")
    return math.log10(1.0 + 1.0 / d)


def benford_curve() -> np.ndarray:
    """The nine expected fractions for d = 1..9 (sums to 1 exactly)."""
    return np.array([benford_expected(d) for d in range(1, 10)])


def benford_analysis(table: WordCountTable) -> BenfordResult:
    """Top-9 layer totals, rank-matched against the leading-digit curve.

    Layer totals are sorted descending (ties by layer index); the nine
    largest are normalized by their sum and compared positionally with
    d = 1..9.  R-squared is 1 - SS_res/SS_tot against the fixed curve.
    """
    layer_ids, totals = table.layer_totals()
    positive = int((totals > 0).sum())
    if positive < 9:
        raise DegenerateFitError(
            f"Benford analysis needs at least 9 layers with nonzero totals, got {positive}"
        )
    order = np.lexsort((layer_ids, -totals))
    top9 = totals[order[:9]].astype(np.float64)
    observed = top9 / top9.sum()
    if np.ptp(observed) == 0.0:
        raise DegenerateFitError("top-9 layer totals are all equal: zero variance")
    expected = benford_curve()
    ss_res = float(((observed - expected) ** 2).sum())
    ss_tot = float(((observed - observed.mean()) ** 2).sum())
    return BenfordResult(
        observed=observed,
        expected=expected,
        r_square=1.0 - ss_res / ss_tot,
        layer_totals=totals,
    )


def spearman_rho(x, y) -> float:
    """Spearman rank correlation with average ranks for ties."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("spearman_rho needs two equal-length 1-D arrays of size >= 2")
    rx, ry = _average_ranks(x), _average_ranks(y)
    dx, dy = rx - rx.mean(), ry - ry.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0.0:
        return 0.0
    return float(dx @ dy) / denom


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _as_table(X) -> WordCountTable:
    if isinstance(X, WordCountTable):
        return X
    counts = np.asarray(X, dtype=np.int64).ravel()
    return WordCountTable(
        layers=np.ones(counts.size, dtype=np.int64),
        kernels=np.arange(counts.size, dtype=np.int64),
        counts=counts,
    )


class ZipfLaw(BaseEstimator):
    """Estimator facade over :func:`zipf_analysis`.

    Accepts a WordCountTable or a plain 1-D array of counts.  After ``fit``:
    ``alpha_``, ``r_square_``, ``result_``.
    """

    def fit(self, X, y=None):
        self.result_ = zipf_analysis(_as_table(X))
        self.alpha_ = self.result_.alpha
        self.r_square_ = self.result_.fit.r_square
        return self


class HeapsLaw(BaseEstimator):
    """Estimator facade over :func:`heaps_analysis`.

    After ``fit``: ``k_``, ``beta_``, ``r_square_``, ``result_``.
    """

    def __init__(self, iterations: int = 100, seed: int = 0):
        self.iterations = iterations
        self.seed = seed

    def fit(self, X, y=None):
        self.result_ = heaps_analysis(_as_table(X), iterations=self.iterations, seed=self.seed)
        self.k_ = self.result_.k
        self.beta_ = self.result_.beta
        self.r_square_ = self.result_.fit.r_square
        return self


class BenfordLaw(BaseEstimator):
    """Estimator facade over :func:`benford_analysis`.

    After ``fit``: ``observed_``, ``expected_``, ``r_square_``, ``result_``.
    """

    def fit(self, X, y=None):
        self.result_ = benford_analysis(_as_table(X))
        self.observed_ = self.result_.observed
        self.expected_ = self.result_.expected
        self.r_square_ = self.result_.r_square
        return self
