"""Weekday medians versus k-means centroids on a series with holiday Mondays, plus k-recovery rates.

    python3 scripts/baseline_comparison.py --runs 100
"""

import argparse
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from geolex.baseline import cluster_baseline, cluster_baseline_values, percent, weekday_baseline


@dataclass
class HolidayConfig:
    start: date = date(2020, 1, 6)
    weekday_level: float = 1000.0
    saturday: float = 600.0
    sunday: float = 400.0
    noise: float = 0.02
    holidays: tuple = (1, 3, 5)  # week offsets after start whose Monday is a holiday
    seed: int = 7


def holiday_series(cfg: HolidayConfig) -> tuple[dict, set]:
    rng = np.random.default_rng(cfg.seed)
    holidays = {cfg.start + timedelta(weeks=w) for w in cfg.holidays}
    series = {}
    for i in range(13 * 7 + 6 * 7):
        d = cfg.start - timedelta(weeks=13) + timedelta(days=i)
        wd = d.weekday()
        level = cfg.sunday if d in holidays or wd == 6 else cfg.saturday if wd == 5 else cfg.weekday_level
        series[d] = float(level * (1 + rng.uniform(-cfg.noise, cfg.noise)))
    return series, holidays


def k_recovery(k_true: int, runs: int, separation: float = 10.0) -> int:
    hits = 0
    for seed in range(runs):
        rng = np.random.default_rng([k_true, seed])
        centres = np.cumsum(rng.uniform(separation, 2 * separation, size=k_true))
        x = np.concatenate([rng.normal(c, 1.0, size=int(rng.integers(5, 30))) for c in centres])
        hits += cluster_baseline_values(x, seed=seed).k == k_true
    return hits


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=7)
    args = p.parse_args()

    cfg = HolidayConfig(seed=args.seed)
    series, holidays = holiday_series(cfg)
    analysis = {d: v for d, v in series.items() if d >= cfg.start}
    wk = percent(analysis, weekday_baseline(series, cfg.start))
    base = cluster_baseline(series, cfg.start, seed=args.seed)
    km = percent(analysis, base)
    print(f"k-means k={base.k} centroids={[round(c, 1) for c in base.centroids]}")
    print("date        weekday  kmeans")
    for d in sorted(analysis):
        mark = "  holiday" if d in holidays else ""
        print(f"{d} {wk[d]:8.2f} {km[d]:7.2f}{mark}")

    print(f"\nk recovery over {args.runs} runs (separation >= 10x spread)")
    for k in (2, 3, 4, 5):
        print(f"  k*={k}: {k_recovery(k, args.runs)}/{args.runs}")


if __name__ == "__main__":
    main()
