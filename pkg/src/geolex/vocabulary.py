"""Per-scope token vocabularies and the operations built on them.

A ``Vocabulary`` maps token keys (see ``geolex.text``) to counts and is
scoped by a set of days, a language and a country (or ``"any"``).
"""

from __future__ import annotations

import json
import math
import random
import warnings
from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass, field
from datetime import date
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    BothEmpty,
    DegenerateMatrix,
    InsufficientCorpus,
    MatrixEntryError,
    NoPriorYears,
    ScopeMismatch,
)
from .records import ANY, Store
from .text import TokenizerConfig, default_emoji_table, is_qgram_key, token_keys, Token

RETENTION_RATE = 0.0001
COMMON_SAMPLE_SIZE = 5_000_000
COMMON_RATE = 0.001


def retention_floor(num_messages: int, rate: float = RETENTION_RATE) -> int:
    """Minimum count a token needs to survive a day with ``num_messages`` messages."""
    return max(1, math.ceil(Fraction(str(rate)) * num_messages))


@dataclass(frozen=True)
class Vocabulary(Mapping):
    dates: frozenset = frozenset()
    lang: str | None = None
    country: str = ANY
    counts: Mapping[str, int] = field(default_factory=dict)
    num_messages: int = 0

    def __getitem__(self, key: str) -> int:
        return self.counts[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self.counts)

    def __len__(self) -> int:
        return len(self.counts)

    def _with(self, counts) -> "Vocabulary":
        return Vocabulary(self.dates, self.lang, self.country, dict(counts), self.num_messages)

    def remove_qgrams(self) -> "Vocabulary":
        return self._with((k, n) for k, n in self.counts.items() if not is_qgram_key(k))

    def remove_emojis(self) -> "Vocabulary":
        table = default_emoji_table()
        return self._with(
            (k, n) for k, n in self.counts.items() if not table.is_emoji(Token.from_key(k).surface)
        )

    def remove(self, tokens: Iterable[str]) -> "Vocabulary":
        drop = set(tokens)
        if not drop:
            return self
        return self._with((k, n) for k, n in self.counts.items() if k not in drop)

    def most_common(self, n: int | None = None) -> list[tuple[str, int]]:
        items = sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return items if n is None else items[:n]

    # --- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "scope": {
                "dates": sorted(d.isoformat() for d in self.dates),
                "lang": self.lang,
                "country": self.country,
            },
            "num_messages": self.num_messages,
            "tokens": dict(sorted(self.counts.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=1)

    @classmethod
    def from_dict(cls, data: dict) -> "Vocabulary":
        scope = data["scope"]
        return cls(
            dates=frozenset(date.fromisoformat(d) for d in scope["dates"]),
            lang=scope["lang"],
            country=scope["country"],
            counts=dict(data["tokens"]),
            num_messages=int(data["num_messages"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        return cls.from_dict(json.loads(text))


def build_day(
    texts: Iterable[str],
    day: date,
    lang: str,
    country: str = ANY,
    config: TokenizerConfig = TokenizerConfig(),
    day_messages: int | None = None,
    rate: float = RETENTION_RATE,
) -> Vocabulary:
    """Count tokens over one day's messages and drop those below the retention floor.

    ``day_messages`` is the day's message count for the whole language; it
    defaults to the number of texts given, which is right for the ``any``
    partition. Country partitions should pass the language-wide count.
    """
    counts: Counter = Counter()
    n = 0
    update = counts.update
    for text in texts:
        update(token_keys(text, config))
        n += 1
    floor = retention_floor(n if day_messages is None else day_messages, rate)
    if floor > 1:
        kept = {k: c for k, c in counts.items() if c >= floor}
    else:
        kept = dict(counts)
    return Vocabulary(frozenset([day]), lang, country, kept, n)


def merge(vocabs: Sequence[Vocabulary]) -> Vocabulary:
    if not vocabs:
        return Vocabulary()
    lang, country = vocabs[0].lang, vocabs[0].country
    total: Counter = Counter()
    dates: set = set()
    n = 0
    for v in vocabs:
        if (v.lang, v.country) != (lang, country):
            raise ScopeMismatch(f"cannot merge {v.lang}/{v.country} into {lang}/{country}")
        total.update(v.counts)
        dates |= v.dates
        n += v.num_messages
    return Vocabulary(frozenset(dates), lang, country, dict(total), n)


def day_vocabulary(
    store: Store,
    day: date,
    lang: str,
    country: str = ANY,
    config: TokenizerConfig = TokenizerConfig(),
    rate: float = RETENTION_RATE,
) -> Vocabulary:
    day_messages = store.count(lang, day, ANY)
    return build_day(store.read_texts(lang, day, country), day, lang, country, config, day_messages, rate)


def _day_vocabulary_args(args):
    return day_vocabulary(*args)


def store_vocabulary(
    store: Store,
    dates: Iterable[date],
    lang: str,
    country: str = ANY,
    config: TokenizerConfig = TokenizerConfig(),
    rate: float = RETENTION_RATE,
    jobs: int = 1,
) -> Vocabulary:
    dates = sorted(set(dates))
    tasks = [(store, d, lang, country, config, rate) for d in dates]
    if jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            vocabs = list(pool.map(_day_vocabulary_args, tasks))
    else:
        vocabs = [day_vocabulary(*t) for t in tasks]
    if not vocabs:
        return Vocabulary(frozenset(), lang, country, {}, 0)
    return merge(vocabs)


def common_words(
    texts: Iterable[str],
    sample_size: int = COMMON_SAMPLE_SIZE,
    rate: float = COMMON_RATE,
    seed: int = 42,
    config: TokenizerConfig = TokenizerConfig(),
) -> frozenset:
    """Tokens whose document frequency in a uniform sample reaches ``rate * sample_size``.

    Sampling is reservoir-based so the corpus can be a stream. A corpus
    smaller than ``sample_size`` is used whole, with a warning.
    """
    if sample_size < 1:
        raise ValueError("sample_size must be >= 1")
    rng = random.Random(seed)
    reservoir: list[str] = []
    seen = 0
    for text in texts:
        if seen < sample_size:
            reservoir.append(text)
        else:
            j = rng.randrange(seen + 1)
            if j < sample_size:
                reservoir[j] = text
        seen += 1
    if seen < sample_size:
        warnings.warn(
            f"corpus has {seen} messages, fewer than sample size {sample_size}; using all of it",
            InsufficientCorpus,
            stacklevel=2,
        )
    df: Counter = Counter()
    for text in reservoir:
        df.update(set(token_keys(text, config)))
    threshold = Fraction(str(rate)) * len(reservoir)
    return frozenset(k for k, c in df.items() if c >= threshold)


def prior_year_dates(day: date, available: Iterable[date], years_back: int | None = None) -> list[date]:
    prior = sorted(
        (d for d in available if d.month == day.month and d.day == day.day and d.year < day.year),
        reverse=True,
    )
    return prior if years_back is None else prior[:years_back]


def day_words(
    vocab: Vocabulary,
    store: Store,
    years_back: int | None = None,
    config: TokenizerConfig = TokenizerConfig(),
    rate: float = RETENTION_RATE,
) -> frozenset:
    """Union of tokens seen on the same month-day in earlier years of the store."""
    available = store.dates(vocab.lang)
    prior: set[date] = set()
    for d in vocab.dates:
        prior.update(prior_year_dates(d, available, years_back))
    if not prior:
        warnings.warn("no prior-year partitions for this month-day", NoPriorYears, stacklevel=2)
        return frozenset()
    out: set[str] = set()
    for d in sorted(prior):
        out.update(day_vocabulary(store, d, vocab.lang, vocab.country, config, rate).counts)
    return frozenset(out)


def sample_days(dates: Iterable[date], n: int, seed: int = 42) -> list[date]:
    pool = sorted(set(dates))
    return sorted(random.Random(seed).sample(pool, min(n, len(pool))))


# --- similarity -------------------------------------------------------------

def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    sa = a if isinstance(a, (set, frozenset)) else set(a)
    sb = b if isinstance(b, (set, frozenset)) else set(b)
    union = len(sa | sb)
    if union == 0:
        raise BothEmpty("jaccard of two empty token sets")
    return len(sa & sb) / union


@dataclass(frozen=True)
class SimilarityMatrix:
    labels: tuple[str, ...]
    values: np.ndarray

    def to_csv_rows(self) -> list[list]:
        rows = [["", *self.labels]]
        for label, row in zip(self.labels, self.values):
            rows.append([label, *row.tolist()])
        return rows


def similarity_matrix(vocabs: Sequence[Iterable[str]], labels: Sequence[str] | None = None) -> SimilarityMatrix:
    if len(vocabs) < 2:
        raise ValueError("need at least two vocabularies")
    if labels is None:
        labels = [getattr(v, "country", str(i)) for i, v in enumerate(vocabs)]
    sets = [frozenset(v) for v in vocabs]
    n = len(sets)
    values = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            try:
                values[i, j] = values[j, i] = jaccard(sets[i], sets[j])
            except BothEmpty:
                raise MatrixEntryError(i, j, labels) from None
    return SimilarityMatrix(tuple(labels), values)


def pca_project(matrix, components: int = 2, tol: float = 1e-10) -> np.ndarray:
    """Project rows onto the leading principal axes.

    Eigendecomposition of the explicit covariance of the column-centred rows.
    Each axis is oriented so its largest-magnitude loading is positive. Axes
    whose variance is negligible (rank deficiency) come back as zero columns
    with a ``DegenerateMatrix`` warning.
    """
    x = np.asarray(getattr(matrix, "values", matrix), dtype=float)
    n = x.shape[0]
    if n < components:
        raise ValueError(f"need at least {components} rows, got {n}")
    xc = x - x.mean(axis=0)
    cov = xc.T @ xc / max(n - 1, 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals, kind="stable")[::-1][:components]
    evals, evecs = evals[order], evecs[:, order]
    for c in range(evecs.shape[1]):
        lead = np.argmax(np.abs(evecs[:, c]))
        if evecs[lead, c] < 0:
            evecs[:, c] = -evecs[:, c]
    coords = xc @ evecs
    scale = max(float(evals[0]) if evals.size else 0.0, 0.0)
    degenerate = [c for c in range(len(evals)) if evals[c] <= tol * scale or scale == 0.0]
    if degenerate:
        warnings.warn(
            f"covariance rank below {components}; components {degenerate} set to zero",
            DegenerateMatrix,
            stacklevel=2,
        )
        coords[:, degenerate] = 0.0
    return coords
