"""Jaccard similarity of per-country vocabularies and their 2-D PCA layout.

Works on any ingested store; without ``--store`` a synthetic corpus is generated.

    python3 scripts/dialect_similarity.py --store data/store --lang es --countries MX,AR,ES,CO --sample-days 180
"""

import argparse
import tempfile
import warnings

from geolex.records import Store, ingest
from geolex.synth import SynthConfig, synth
from geolex.text import WORDS_AND_BIGRAMS
from geolex.vocabulary import pca_project, sample_days, similarity_matrix, store_vocabulary


def layout(store: Store, lang: str, countries: list[str], n_days: int, seed: int, jobs: int = 1):
    days = sample_days(store.dates(lang), n_days, seed)
    vocabs = [
        store_vocabulary(store, days, lang, c, WORDS_AND_BIGRAMS, jobs=jobs).remove_qgrams().remove_emojis()
        for c in countries
    ]
    matrix = similarity_matrix(vocabs, countries)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        coords = pca_project(matrix)
    return days, vocabs, matrix, coords, caught


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--store", default=None)
    p.add_argument("--lang", default="en")
    p.add_argument("--countries", default="US,CA")
    p.add_argument("--sample-days", type=int, default=20)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--jobs", type=int, default=1)
    args = p.parse_args()
    countries = [c.strip().upper() for c in args.countries.split(",")]

    with tempfile.TemporaryDirectory() as tmp:
        if args.store:
            store = Store(args.store)
        else:
            store = Store(tmp)
            ingest(synth(SynthConfig(n_users=300, n_days=30, seed=args.seed)), store)
        days, vocabs, matrix, coords, caught = layout(store, args.lang, countries, args.sample_days, args.seed, args.jobs)

    print(f"{len(days)} sampled days; vocabulary sizes " + ", ".join(f"{c}={len(v)}" for c, v in zip(countries, vocabs)))
    print("      " + " ".join(f"{c:>7s}" for c in countries))
    for c, row in zip(countries, matrix.values):
        print(f"{c:>5s} " + " ".join(f"{v:7.4f}" for v in row))
    print("\ncountry      pc1      pc2")
    for c, (x, y) in zip(countries, coords):
        print(f"{c:>7s} {x:8.4f} {y:8.4f}")
    for w in caught:
        print(f"note: {w.message}")


if __name__ == "__main__":
    main()
