"""Percent-of-baseline mobility: weekday medians or k-means centroids.

Series are plain ``{date: value}`` mappings throughout.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ConstantSeries,
    DegenerateData,
    InsufficientBaselineData,
    LengthMismatch,
    SingleCluster,
    TooFewPoints,
    ZeroBaseline,
)

BASELINE_WEEKS = 13
K_RANGE = (2, 7)
N_INIT = 10
MAX_ITER = 100
TOL = 1e-9

WEEKDAY, KMEANS = "weekday", "kmeans"


def lower_median(values: Sequence[float]) -> float:
    s = sorted(values)
    if not s:
        raise ValueError("median of empty sequence")
    return s[(len(s) - 1) // 2]


def baseline_window(start: date, weeks: int = BASELINE_WEEKS) -> tuple[date, date]:
    """Half-open ``[start - weeks, start)`` window preceding the first analysed day."""
    return start - timedelta(weeks=weeks), start


def window_values(series: Mapping[date, float], start: date, weeks: int = BASELINE_WEEKS) -> dict[date, float]:
    lo, hi = baseline_window(start, weeks)
    return {d: v for d, v in sorted(series.items()) if lo <= d < hi}


@dataclass(frozen=True)
class Baseline:
    method: str
    window: tuple[date, date]
    medians: dict[int, float] = field(default_factory=dict)
    centroids: tuple[float, ...] = ()
    scores: dict[int, float] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.centroids)

    def reference(self, day: date, value: float) -> float:
        if self.method == WEEKDAY:
            return self.medians[day.weekday()]
        c = np.asarray(self.centroids)
        return float(c[np.argmin(np.abs(c - value))])


def weekday_baseline(series: Mapping[date, float], start: date, weeks: int = BASELINE_WEEKS) -> Baseline:
    """Lower median of each weekday over the ``weeks`` weeks before ``start``."""
    by_day: dict[int, list[float]] = {i: [] for i in range(7)}
    for d, v in window_values(series, start, weeks).items():
        by_day[d.weekday()].append(float(v))
    for wd, vals in by_day.items():
        if not vals:
            raise InsufficientBaselineData(wd)
    return Baseline(WEEKDAY, baseline_window(start, weeks), medians={wd: lower_median(v) for wd, v in by_day.items()})


# --- k-means ----------------------------------------------------------------

@dataclass
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float
    n_iter: int
    history: list[float]


def _assign(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    return np.argmin(np.abs(x[:, None] - c[None, :]), axis=1)


def _inertia(x, c, labels) -> float:
    return float(np.sum((x - c[labels]) ** 2))


def _plusplus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = [x[rng.integers(len(x))]]
    d2 = (x - centers[0]) ** 2
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(len(x))
        else:
            idx = rng.choice(len(x), p=d2 / total)
        centers.append(x[idx])
        d2 = np.minimum(d2, (x - x[idx]) ** 2)
    return np.array(centers, dtype=float)


def kmeans_1d(
    values: Sequence[float], k: int, rng: np.random.Generator, max_iter: int = MAX_ITER, tol: float = TOL
) -> KMeansResult:
    """Lloyd iterations from a k-means++ start; centroids returned in ascending order."""
    x = np.asarray(values, dtype=float)
    c = _plusplus(x, k, rng)
    labels = _assign(x, c)
    history = [_inertia(x, c, labels)]
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        new = c.copy()
        for j in range(k):
            members = x[labels == j]
            if members.size:
                new[j] = members.mean()
        shift = float(np.max(np.abs(new - c)))
        c = new
        labels = _assign(x, c)
        history.append(_inertia(x, c, labels))
        if shift <= tol:
            break
    order = np.argsort(c, kind="stable")
    remap = np.empty(k, dtype=int)
    remap[order] = np.arange(k)
    return KMeansResult(c[order], remap[labels], history[-1], n_iter, history)


def best_kmeans(values: Sequence[float], k: int, seed: int, n_init: int = N_INIT) -> KMeansResult:
    rng = np.random.default_rng([seed, k])
    best = None
    for _ in range(n_init):
        res = kmeans_1d(values, k, rng)
        if best is None or res.inertia < best.inertia:
            best = res
    return best


def silhouette(values: Sequence[float], labels: Sequence[int], centroids: Sequence[float] | None = None) -> float:
    """Mean silhouette with absolute-difference distance; singletons score 0."""
    x = np.asarray(values, dtype=float)
    lab = np.asarray(labels)
    uniq, lab = np.unique(lab, return_inverse=True)
    if len(uniq) < 2:
        raise SingleCluster("silhouette needs at least two non-empty clusters")
    dist = np.abs(x[:, None] - x[None, :])
    onehot = np.zeros((len(x), len(uniq)))
    onehot[np.arange(len(x)), lab] = 1.0
    sums = dist @ onehot
    sizes = onehot.sum(axis=0)
    own = sizes[lab]
    a = np.where(own > 1, sums[np.arange(len(x)), lab] / np.maximum(own - 1, 1), 0.0)
    means = sums / sizes
    means[np.arange(len(x)), lab] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where((own > 1) & (denom > 0), (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    return float(s.mean())


def select_k(
    values: Sequence[float], k_min: int = K_RANGE[0], k_max: int = K_RANGE[1], seed: int = 42, n_init: int = N_INIT
) -> tuple[KMeansResult, dict[int, float]]:
    x = np.asarray(values, dtype=float)
    distinct = len(np.unique(x))
    scores: dict[int, float] = {}
    best_k, best_res = None, None
    for k in range(k_min, k_max + 1):
        if k > distinct:
            break
        res = best_kmeans(x, k, seed, n_init)
        if len(np.unique(res.labels)) < 2:
            continue
        scores[k] = silhouette(x, res.labels, res.centroids)
        if best_k is None or scores[k] > scores[best_k]:
            best_k, best_res = k, res
    return best_res, scores


def cluster_baseline(
    series: Mapping[date, float],
    start: date,
    weeks: int = BASELINE_WEEKS,
    k_min: int = K_RANGE[0],
    k_max: int = K_RANGE[1],
    seed: int = 42,
    n_init: int = N_INIT,
) -> Baseline:
    """k-means centroids of the baseline window, k chosen by silhouette."""
    window = baseline_window(start, weeks)
    vals = np.array(list(window_values(series, start, weeks).values()), dtype=float)
    return cluster_baseline_values(vals, window, k_min, k_max, seed, n_init)


def cluster_baseline_values(values, window=None, k_min=K_RANGE[0], k_max=K_RANGE[1], seed=42, n_init=N_INIT) -> Baseline:
    x = np.asarray(values, dtype=float)
    if len(x) < k_max + 1:
        raise TooFewPoints(f"{len(x)} observations; need at least {k_max + 1}")
    if np.all(x == x[0]):
        warnings.warn("baseline values are constant; using a single centroid", DegenerateData, stacklevel=2)
        return Baseline(KMEANS, window, centroids=(float(x[0]),))
    res, scores = select_k(x, k_min, k_max, seed, n_init)
    return Baseline(KMEANS, window, centroids=tuple(float(c) for c in res.centroids), scores=scores)


def percent(series: Mapping[date, float], baseline: Baseline) -> dict[date, float]:
    out = {}
    for d, v in sorted(series.items()):
        b = baseline.reference(d, v)
        if not b > 0:
            raise ZeroBaseline(f"baseline for {d} is {b}")
        out[d] = 100.0 * (v - b) / b
    return out


# --- comparison utilities ---------------------------------------------------

def moving_average(series, window: int = 7):
    """Trailing mean over up to ``window`` previous observations (``min_periods=1``)."""
    if window < 1:
        raise ValueError("window must be >= 1")
    if isinstance(series, Mapping):
        keys = sorted(series)
        vals = moving_average([series[k] for k in keys], window)
        return dict(zip(keys, vals))
    vals = [float(v) for v in series]
    return [math.fsum(vals[max(0, i - window + 1) : i + 1]) / min(i + 1, window) for i in range(len(vals))]


def _joined(a, b) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(a, Mapping) and isinstance(b, Mapping):
        keys = sorted(set(a) & set(b))
        if len(keys) < 2:
            raise LengthMismatch(f"only {len(keys)} overlapping dates")
        return np.array([a[k] for k in keys], float), np.array([b[k] for k in keys], float)
    x, y = np.asarray(list(a), float), np.asarray(list(b), float)
    if len(x) != len(y) or len(x) < 2:
        raise LengthMismatch(f"lengths {len(x)} and {len(y)}")
    return x, y


def pearson(a, b) -> float:
    x, y = _joined(a, b)
    dx, dy = x - x.mean(), y - y.mean()
    sx, sy = math.fsum(dx * dx), math.fsum(dy * dy)
    if sx == 0 or sy == 0:
        raise ConstantSeries("pearson correlation of a constant series")
    r = math.fsum(dx * dy) / math.sqrt(sx * sy)
    return max(-1.0, min(1.0, r))


def iso_week(d: date) -> str:
    y, w, _ = d.isocalendar()
    return f"{y}-W{w:02d}"


@dataclass
class Heatmap:
    weeks: list[str]
    countries: list[str]
    values: list[list[float | None]]


def weekly_heatmap(
    percents: Mapping[str, Mapping[date, float]], totals: Mapping[str, float] | None = None, top: int | None = 30
) -> Heatmap:
    """Mean percent per ISO week and country; columns ordered by total travels, descending."""
    totals = totals or {}
    countries = sorted(percents, key=lambda c: (-totals.get(c, 0), c))
    if top is not None:
        countries = countries[:top]
    cells: dict[tuple[str, str], list[float]] = {}
    for c in countries:
        for d, v in percents[c].items():
            cells.setdefault((iso_week(d), c), []).append(v)
    weeks = sorted({w for w, _ in cells})
    values = [
        [math.fsum(cells[(w, c)]) / len(cells[(w, c)]) if (w, c) in cells else None for c in countries]
        for w in weeks
    ]
    return Heatmap(weeks, countries, values)
