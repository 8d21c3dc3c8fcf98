"""Time ingest + tokenize + per-day aggregation on a synthetic stream.

    python3 scripts/throughput.py --records 1000000
"""

import argparse
import itertools
import tempfile
import time

from geolex.records import Store, ingest
from geolex.synth import SynthConfig, synth
from geolex.vocabulary import day_vocabulary


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--records", type=int, default=1_000_000)
    p.add_argument("--users", type=int, default=2500)
    p.add_argument("--seed", type=int, default=9)
    args = p.parse_args()

    # about 3.5 records per user-day with default chatter
    days = max(1, round(args.records / (3.5 * args.users)) + 5)
    t0 = time.perf_counter()
    lines = list(itertools.islice(synth(SynthConfig("commuters", args.users, days, args.seed)), args.records))
    print(f"generated {len(lines)} records in {time.perf_counter() - t0:.1f}s (not timed below)")

    with tempfile.TemporaryDirectory() as d:
        t0 = time.perf_counter()
        store = Store(d)
        report = ingest(lines, store)
        t_ingest = time.perf_counter() - t0
        tokens = 0
        for lang in store.langs():
            for day in store.dates(lang):
                tokens += len(day_vocabulary(store, day, lang))
        total = time.perf_counter() - t0
    print(f"ingest    {t_ingest:7.1f}s  {report.summary()}")
    print(f"vocab     {total - t_ingest:7.1f}s  {tokens} retained day-tokens")
    print(f"total     {total:7.1f}s  ({report.ingested / total:,.0f} records/s)")


if __name__ == "__main__":
    main()
