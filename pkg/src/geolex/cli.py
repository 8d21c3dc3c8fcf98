"""``geolex`` command line: ingest -> landmarks -> trips -> series -> baselines, plus text exports."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from collections import defaultdict
from datetime import date, timedelta
from pathlib import Path

from . import baseline as bl
from .errors import DataError, GeolexError
from .fileio import atomic_write_bytes, atomic_write_dir, atomic_write_text, csv_text, read_csv
from .mobility import MEASURES, LandmarkSet, ODMatrix, country_series, landmarks_from_store, store_od
from .records import ANY, Store, ingest
from .synth import PROFILES, SynthConfig, synth
from .text import WORDS_AND_BIGRAMS, TokenizerConfig
from .vocabulary import (
    COMMON_RATE,
    COMMON_SAMPLE_SIZE,
    RETENTION_RATE,
    common_words,
    day_words,
    pca_project,
    sample_days,
    similarity_matrix,
    store_vocabulary,
)

log = logging.getLogger("geolex")

EXIT_USAGE, EXIT_DATA, EXIT_IO = 2, 3, 4


class UsageError(GeolexError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- argument helpers -------------------------------------------------------

def _date(s: str) -> date:
    try:
        return date.fromisoformat(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO date: {s!r}") from None


def _date_range(spec: str) -> tuple[date, date]:
    if ".." in spec:
        a, b = spec.split("..", 1)
        lo, hi = _date(a), _date(b)
    else:
        lo = hi = _date(spec)
    if hi < lo:
        raise UsageError(f"empty date range {spec!r}")
    return lo, hi


def _days_between(lo: date, hi: date) -> list[date]:
    return [lo + timedelta(days=i) for i in range((hi - lo).days + 1)]


def resolve_dates(spec: str, available: list[date]) -> list[date]:
    """``YYYY-MM-DD``, ``START..END`` (inclusive) or ``sample:N:SEED[:START..END]``."""
    if spec.startswith("sample:"):
        parts = spec.split(":", 3)
        if len(parts) < 3:
            raise UsageError(f"bad sample spec {spec!r}; expected sample:N:SEED[:START..END]")
        try:
            n, seed = int(parts[1]), int(parts[2])
        except ValueError:
            raise UsageError(f"bad sample spec {spec!r}") from None
        pool = available
        if len(parts) == 4:
            lo, hi = _date_range(parts[3])
            pool = [d for d in available if lo <= d <= hi]
        return sample_days(pool, n, seed)
    lo, hi = _date_range(spec)
    return _days_between(lo, hi)


def _countries(s: str | None) -> list[str] | None:
    if not s:
        return None
    return [c.strip().upper() for c in s.split(",") if c.strip()]


def _default_jobs() -> int:
    return os.cpu_count() or 1


# --- subcommands --------------------------------------------------------------

def cmd_ingest(args) -> int:
    store = Store(args.store)
    if args.input == "-":
        report = ingest(sys.stdin.buffer, store)
    else:
        with open(args.input, "rb") as fh:
            report = ingest(fh, store)
    for name, n in sorted(report.errors.items()):
        log.info("rejected %s=%d", name, n)
    print(report.summary(), file=sys.stderr)
    return 0


def cmd_synth(args) -> int:
    cfg = SynthConfig(
        profile=args.profile,
        n_users=args.users,
        n_days=args.days,
        seed=args.seed,
        start=args.start,
        drop=args.drop,
        at=args.at,
    )
    text = "".join(line + "\n" for line in synth(cfg))
    if args.out == "-":
        sys.stdout.write(text)
    else:
        atomic_write_text(args.out, text)
    return 0


def _tokenizer(args) -> TokenizerConfig:
    return TokenizerConfig.load(args.tokenizer_config) if args.tokenizer_config else TokenizerConfig()


def cmd_vocab(args) -> int:
    store = Store(args.store)
    lang, country = args.lang.lower(), args.country if args.country == ANY else args.country.upper()
    available = store.dates(lang)
    dates = [d for d in resolve_dates(args.date, available) if d in set(available)]
    if not dates:
        raise DataError(f"no {lang} partitions for {args.date}")
    config = _tokenizer(args)
    voc = store_vocabulary(store, dates, lang, country, config, args.retention, args.jobs)
    if args.drop_qgrams:
        voc = voc.remove_qgrams()
    if args.drop_emojis:
        voc = voc.remove_emojis()
    if args.drop_common:
        texts = (t for d in available for t in store.read_texts(lang, d))
        voc = voc.remove(common_words(texts, args.common_sample, args.common_rate, args.seed, config))
    if args.drop_prior_years:
        voc = voc.remove(day_words(voc, store, args.years_back, config, args.retention))
    atomic_write_text(args.out, voc.to_json() + "\n")
    log.info("vocabulary: %d tokens over %d messages", len(voc), voc.num_messages)
    return 0


def cmd_similarity(args) -> int:
    store = Store(args.store)
    lang = args.lang.lower()
    countries = _countries(args.countries)
    if not countries or len(countries) < 2:
        raise UsageError("--countries needs at least two codes")
    available = store.dates(lang)
    if args.range:
        lo, hi = _date_range(args.range)
        available = [d for d in available if lo <= d <= hi]
    dates = sample_days(available, args.sample_days, args.seed)
    if not dates:
        raise DataError(f"no {lang} partitions to sample")
    vocabs = [
        store_vocabulary(store, dates, lang, c, WORDS_AND_BIGRAMS, args.retention, args.jobs).remove_qgrams().remove_emojis()
        for c in countries
    ]
    matrix = similarity_matrix(vocabs, countries)
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        coords = pca_project(matrix, 2)
    out = Path(args.out)
    matrix_out = Path(args.matrix_out) if args.matrix_out else out.with_name(out.stem + "_matrix.csv")
    atomic_write_text(matrix_out, csv_text(matrix.to_csv_rows()))
    atomic_write_text(out, csv_text([["country", "pc1", "pc2"], *([c, *map(float, xy)] for c, xy in zip(countries, coords))]))
    log.info("similarity over %d sampled days written to %s and %s", len(dates), out, matrix_out)
    return 0


def cmd_build_landmarks(args) -> int:
    store = Store(args.store)
    langs = [s.strip().lower() for s in args.langs.split(",")] if args.langs else None
    lset = landmarks_from_store(store, langs, args.rate)
    out = Path(args.out)
    atomic_write_bytes(out, lset.to_bytes())
    atomic_write_text(out.with_suffix(".csv"), lset.to_csv())
    log.info("%d landmarks", len(lset))
    return 0


def cmd_trips(args) -> int:
    store = Store(args.store)
    lset = LandmarkSet.load(args.landmarks)
    langs = [s.strip().lower() for s in args.langs.split(",")] if args.langs else None
    available = store.dates()
    if args.dates:
        lo, hi = _date_range(args.dates)
        dates = _days_between(lo, hi)
    else:
        dates = available
    if not dates:
        raise DataError("no dates to process")
    ods = store_od(store, lset, dates, langs, args.jobs)
    files = {f"{od.day.isoformat()}.csv": od.to_csv().encode() for od in ods}
    files["landmarks.csv"] = lset.to_csv().encode()
    atomic_write_dir(args.out, files)
    log.info("%d trips over %d days", sum(od.total for od in ods), len(ods))
    return 0


def load_od_dir(path: str | Path) -> list[ODMatrix]:
    ods = []
    for p in sorted(Path(path).glob("*.csv")):
        try:
            day = date.fromisoformat(p.stem)
        except ValueError:
            continue
        ods.append(ODMatrix.from_csv(p.read_text("utf-8"), day))
    return ods


def cmd_series(args) -> int:
    landmarks = Path(args.landmarks) if args.landmarks else Path(args.od) / "landmarks.csv"
    lset = LandmarkSet.load(landmarks)
    ods = load_od_dir(args.od)
    if not ods:
        raise DataError(f"no OD files in {args.od}")
    series = country_series(ods, lset.countries)
    wanted = _countries(args.countries) or sorted(series)
    rows = [["date", "country", "value"]]
    days = sorted(od.day for od in ods)
    for d in days:
        for c in wanted:
            s = series.get(c)
            rows.append([d, c, s.measure(args.measure)[d] if s else 0])
    if args.format == "json":
        text = json.dumps(
            {c: {d.isoformat(): (series[c].measure(args.measure)[d] if c in series else 0) for d in days} for c in wanted},
            indent=1,
        ) + "\n"
    else:
        text = csv_text(rows)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write_text(args.out, text)
    return 0


def read_series(path) -> dict[str, dict[date, float]]:
    out: dict[str, dict[date, float]] = defaultdict(dict)
    for r in read_csv(path):
        out[r["country"]][date.fromisoformat(r["date"])] = float(r["value"])
    return dict(out)


def cmd_baseline(args) -> int:
    series = read_series(args.series)
    if not series:
        raise DataError(f"empty series file {args.series}")
    wanted = _countries(args.countries) or sorted(series)
    first = min(min(s) for s in series.values())
    start = args.start or first + timedelta(weeks=args.weeks)
    rows = [["date", "country", "period", "travels", "baseline", "percent"]]
    done = 0
    for c in wanted:
        s = series.get(c)
        if not s:
            log.warning("skipping %s: no series", c)
            continue
        if max(s) < start:
            log.warning("skipping %s: no days on or after %s", c, start)
            continue
        try:
            if args.method == bl.WEEKDAY:
                base = bl.weekday_baseline(s, start, args.weeks)
            else:
                base = bl.cluster_baseline(s, start, args.weeks, args.k_min, args.k_max, args.seed)
            lo = base.window[0]
            span = {d: v for d, v in s.items() if d >= lo}
            pct = bl.percent(span, base)
        except DataError as exc:
            log.warning("skipping %s: %s", c, exc)
            continue
        for d in sorted(span):
            period = "baseline" if d < start else "analysis"
            rows.append([d, c, period, span[d], float(base.reference(d, span[d])), pct[d]])
        if base.method == bl.KMEANS:
            log.info("%s: k=%d silhouette=%s", c, base.k, {k: round(v, 4) for k, v in base.scores.items()})
        done += 1
    if not done:
        raise DataError("no country had a usable baseline")
    atomic_write_text(args.out, csv_text(rows))
    return 0


PERCENT_COLUMNS = {"date", "country", "period", "travels", "percent"}


def read_percent(paths) -> tuple[dict, dict]:
    """Analysis-period percents and baseline-period travels per country."""
    analysis: dict[str, dict[date, float]] = defaultdict(dict)
    travels: dict[str, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    for path in paths:
        rows = read_csv(path)
        if rows and not PERCENT_COLUMNS <= set(rows[0]):
            if len(paths) == 1:
                raise DataError(f"{path} is not a percent file; expected columns {sorted(PERCENT_COLUMNS)}")
            log.warning("skipping %s: not a percent file", path)
            continue
        for r in rows:
            c, period = r["country"], r["period"]
            travels[c][period].append(float(r["travels"]))
            if period == "analysis":
                analysis[c][date.fromisoformat(r["date"])] = float(r["percent"])
    return dict(analysis), travels


def cmd_compare(args) -> int:
    ours, travels = read_percent([args.ours])
    ref: dict[str, dict[date, float]] = defaultdict(dict)
    for r in read_csv(args.ref):
        ref[r["country"]][date.fromisoformat(r["date"])] = float(r["percent"])
    rows = [["country", "pearson", "median_travels"]]
    for c in sorted(set(ours) & set(ref)):
        try:
            r = bl.pearson(bl.moving_average(ours[c], 7), bl.moving_average(ref[c], 7))
        except DataError as exc:
            log.warning("skipping %s: %s", c, exc)
            continue
        base = travels[c].get("baseline") or travels[c].get("analysis")
        rows.append([c, r, bl.lower_median(base)])
    atomic_write_text(args.out, csv_text(rows))
    return 0


def cmd_heatmap(args) -> int:
    src = Path(args.percent)
    paths = sorted(src.glob("*.csv")) if src.is_dir() else [src]
    analysis, travels = read_percent(paths)
    totals = {c: sum(travels[c].get("analysis", [])) for c in analysis}
    hm = bl.weekly_heatmap(analysis, totals, args.top)
    rows = [["week", *hm.countries]] + [[w, *vals] for w, vals in zip(hm.weeks, hm.values)]
    atomic_write_text(args.out, csv_text(rows))
    return 0


# --- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="geolex", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    p.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def jobs(sp):
        sp.add_argument("--jobs", type=int, default=_default_jobs(), help="worker processes (default: all cores)")

    sp = sub.add_parser("ingest", help="parse NDJSON records into the day/lang/country store")
    sp.add_argument("--input", required=True, help="NDJSON file or - for stdin")
    sp.add_argument("--store", required=True)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("synth", help="emit a seeded synthetic NDJSON stream")
    sp.add_argument("--profile", choices=PROFILES, default="commuters")
    sp.add_argument("--users", type=int, default=200)
    sp.add_argument("--days", type=int, default=120)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--start", type=_date, default=date(2019, 11, 1))
    sp.add_argument("--drop", type=float, default=60.0, help="mixed-drop: percent of movers removed")
    sp.add_argument("--at", type=lambda s: int(s.removeprefix("day")), default=40,
                    help="mixed-drop: first day index of the drop (e.g. 40 or day40)")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser(
        "vocab",
        help="token frequencies for a scope (word-cloud input; LDA-ready counts)",
        description="Token frequencies for one language/country over a date, range or random day sample. "
        "With --drop-qgrams --drop-emojis --drop-common the output is word-cloud ready; "
        "adding --drop-prior-years removes tokens seen on the same day in earlier years.",
    )
    sp.add_argument("--store", required=True)
    sp.add_argument("--date", required=True, help="YYYY-MM-DD, START..END or sample:N:SEED[:START..END]")
    sp.add_argument("--lang", required=True)
    sp.add_argument("--country", default=ANY)
    sp.add_argument("--drop-qgrams", action="store_true")
    sp.add_argument("--drop-emojis", action="store_true")
    sp.add_argument("--drop-common", action="store_true")
    sp.add_argument("--drop-prior-years", action="store_true")
    sp.add_argument("--years-back", type=int, default=None)
    sp.add_argument("--common-sample", type=int, default=COMMON_SAMPLE_SIZE)
    sp.add_argument("--common-rate", type=float, default=COMMON_RATE)
    sp.add_argument("--retention", type=float, default=RETENTION_RATE)
    sp.add_argument("--tokenizer-config", default=None, help="TOML or JSON with qgrams/words/bigrams")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--out", required=True)
    jobs(sp)
    sp.set_defaults(func=cmd_vocab)

    sp = sub.add_parser(
        "similarity",
        help="Jaccard matrix and 2-D PCA layout of per-country vocabularies",
        description="Samples days, builds word+bigram vocabularies per country, writes the pairwise "
        "Jaccard matrix and the 2-component PCA coordinates (dialect similarity map).",
    )
    sp.add_argument("--store", required=True)
    sp.add_argument("--lang", default="es")
    sp.add_argument("--countries", required=True)
    sp.add_argument("--sample-days", type=int, default=180)
    sp.add_argument("--range", default=None, help="restrict sampling to START..END")
    sp.add_argument("--retention", type=float, default=RETENTION_RATE)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--out", required=True, help="coordinates CSV")
    sp.add_argument("--matrix-out", default=None, help="matrix CSV (default: <out stem>_matrix.csv)")
    jobs(sp)
    sp.set_defaults(func=cmd_similarity)

    mob = sub.add_parser("mobility", help="landmarks, OD matrices and country series")
    msub = mob.add_subparsers(dest="mobility_command", required=True, parser_class=_Parser)

    sp = msub.add_parser("build-landmarks", help="frequency-filtered bounding boxes (landmark map and size histogram data)")
    sp.add_argument("--store", required=True)
    sp.add_argument("--out", required=True, help="binary landmark file; a .csv twin is written alongside")
    sp.add_argument("--langs", default=None)
    sp.add_argument("--rate", type=float, default=0.01)
    sp.set_defaults(func=cmd_build_landmarks)

    sp = msub.add_parser("trips", help="per-day origin-destination CSVs")
    sp.add_argument("--store", required=True)
    sp.add_argument("--landmarks", required=True)
    sp.add_argument("--dates", default=None, help="YYYY-MM-DD or START..END (default: all store dates)")
    sp.add_argument("--langs", default=None)
    sp.add_argument("--out", required=True)
    jobs(sp)
    sp.set_defaults(func=cmd_trips)

    sp = msub.add_parser("series", help="per-day country travel counts (country mobility curves)")
    sp.add_argument("--od", required=True)
    sp.add_argument("--landmarks", default=None, help="default: <od>/landmarks.csv")
    sp.add_argument("--countries", default=None)
    sp.add_argument("--measure", choices=MEASURES, default="overall")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_series)

    sp = sub.add_parser("baseline", help="percent change against weekday or k-means baselines (weekly boxplot data)")
    sp.add_argument("--series", required=True)
    sp.add_argument("--method", choices=(bl.WEEKDAY, bl.KMEANS), default=bl.WEEKDAY)
    sp.add_argument("--weeks", type=int, default=bl.BASELINE_WEEKS)
    sp.add_argument("--k-min", type=int, default=bl.K_RANGE[0])
    sp.add_argument("--k-max", type=int, default=bl.K_RANGE[1])
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--start", type=_date, default=None, help="first analysed day (default: first day + weeks)")
    sp.add_argument("--countries", default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_baseline)

    sp = sub.add_parser("compare", help="Pearson correlation against an external percent-change series")
    sp.add_argument("--ours", required=True)
    sp.add_argument("--ref", required=True, help="CSV date,country,percent")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("heatmap", help="mean weekly percent per country, top countries by travels")
    sp.add_argument("--percent", required=True, help="percent CSV or a directory of them")
    sp.add_argument("--top", type=int, default=30)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_heatmap)
    return p


def _resolved(args) -> dict:
    return {k: (v.isoformat() if isinstance(v, date) else v) for k, v in sorted(vars(args).items()) if k != "func"}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"geolex: error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="geolex: %(levelname)s: %(message)s", stream=sys.stderr, force=True)
    logging.captureWarnings(True)
    log.info("config %s", json.dumps(_resolved(args), sort_keys=True, default=str))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"geolex: error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"geolex: error: data: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"geolex: error: io: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"geolex: error: data: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
