"""Inject a mobility collapse into synthetic data and measure how well each baseline recovers it.

    python3 scripts/mobility_drop.py --users 600 --days 70 --drop 60 --at 40
"""

import argparse
import math
import tempfile
from collections import defaultdict
from dataclasses import asdict, dataclass
from datetime import date, timedelta

from geolex.baseline import cluster_baseline, iso_week, percent, weekday_baseline
from geolex.mobility import country_series, landmarks_from_store, store_od
from geolex.records import Store, ingest
from geolex.synth import SynthConfig, synth


@dataclass
class Experiment:
    users: int = 600
    days: int = 70
    drop: float = 60.0
    at: int = 40
    seed: int = 42
    start: date = date(2019, 11, 1)
    kmeans_weeks: int = 5
    jobs: int = 1


def run(cfg: Experiment) -> dict:
    scfg = SynthConfig("mixed-drop", cfg.users, cfg.days, cfg.seed, cfg.start, cfg.drop, cfg.at)
    with tempfile.TemporaryDirectory() as d:
        store = Store(d)
        report = ingest(synth(scfg), store)
        lset = landmarks_from_store(store)
        ods = store_od(store, lset, store.dates(), jobs=cfg.jobs)
    series = country_series(ods, lset.countries)
    first = cfg.start + timedelta(days=cfg.at)
    out = {"records": report.ingested, "landmarks": len(lset), "trips": sum(od.total for od in ods), "countries": {}}
    for c in ("MX", "US", "CA"):
        s = series[c].overall
        analysis = {d: v for d, v in s.items() if d >= first}
        wk = percent(analysis, weekday_baseline(s, first))
        km = percent(analysis, cluster_baseline(s, first, weeks=cfg.kmeans_weeks, seed=cfg.seed))
        out["countries"][c] = {"weekday": wk, "kmeans": km}
    return out


def weekly(pct: dict) -> dict:
    cells = defaultdict(list)
    for d, v in pct.items():
        cells[iso_week(d)].append(v)
    return {w: math.fsum(v) / len(v) for w, v in sorted(cells.items())}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    defaults = Experiment()
    for name, value in asdict(defaults).items():
        kind = date.fromisoformat if isinstance(value, date) else type(value)
        p.add_argument("--" + name.replace("_", "-"), type=kind, default=value)
    cfg = Experiment(**vars(p.parse_args()))
    res = run(cfg)
    print(f"records={res['records']} landmarks={res['landmarks']} trips={res['trips']}")
    print(f"injected drop: -{cfg.drop:g}% from day {cfg.at}")
    for c, methods in res["countries"].items():
        for name, pct in methods.items():
            vals = list(pct.values())
            print(f"{c} {name:8s} mean={math.fsum(vals) / len(vals):7.2f} min={min(vals):7.2f} max={max(vals):7.2f}")
        for w, v in weekly(methods["weekday"]).items():
            print(f"    {w} {v:7.2f}")


if __name__ == "__main__":
    main()
