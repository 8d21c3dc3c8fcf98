"""Message records, NDJSON parsing and the day-partitioned on-disk store.

Store layout::

    <root>/<lang>/<YYYY-MM-DD>/<COUNTRY>.ndjson   # records carrying that country
    <root>/<lang>/<YYYY-MM-DD>/any.ndjson         # every record of the day/lang

A record with a country lands in two files (its country and ``any``); a
record without one lands only in ``any``.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Union

from .errors import (
    InvalidCoordinate,
    InvalidField,
    InvalidTimestamp,
    MalformedJson,
    MissingField,
)

ANY = "any"

_LANG_RE = re.compile(r"[a-z]{2}\Z")
_COUNTRY_RE = re.compile(r"[A-Z]{2}\Z")
_FAST_TS = re.compile(r"(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})Z\Z")


class Point(NamedTuple):
    lat: float
    lon: float


class BBox(NamedTuple):
    min_lon: float
    min_lat: float
    max_lon: float
    max_lat: float

    @property
    def centroid(self) -> Point:
        return Point((self.min_lat + self.max_lat) / 2.0, (self.min_lon + self.max_lon) / 2.0)


GeoShape = Union[Point, BBox]


@dataclass(frozen=True, slots=True)
class MessageRecord:
    user_id: str
    timestamp: datetime
    text: str
    lang: str
    country: str | None = None
    geometry: GeoShape | None = None

    @property
    def day(self) -> date:
        return self.timestamp.date()

    def to_json(self) -> str:
        """Canonical one-line serialization; ``parse_record`` round-trips it."""
        obj = {
            "user_id": self.user_id,
            "timestamp": format_timestamp(self.timestamp),
            "text": self.text,
            "lang": self.lang,
        }
        if self.country is not None:
            obj["country"] = self.country
        if isinstance(self.geometry, BBox):
            obj["geo"] = {"bbox": list(self.geometry)}
        elif isinstance(self.geometry, Point):
            obj["geo"] = {"point": list(self.geometry)}
        return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def format_timestamp(ts: datetime) -> str:
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(value) -> datetime:
    if not isinstance(value, str):
        raise InvalidTimestamp("timestamp", f"expected string, got {type(value).__name__}")
    m = _FAST_TS.match(value)
    try:
        if m:
            return datetime(*map(int, m.groups()), tzinfo=timezone.utc)
        ts = datetime.fromisoformat(value[:-1] + "+00:00" if value.endswith("Z") else value)
    except ValueError as exc:
        raise InvalidTimestamp("timestamp", str(exc)) from None
    if ts.tzinfo is None:
        raise InvalidTimestamp("timestamp", "missing UTC offset")
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def _coord(value, lo, hi, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidCoordinate("geo", f"{name} is not a number")
    value = float(value)
    if not math.isfinite(value) or not lo <= value <= hi:
        raise InvalidCoordinate("geo", f"{name}={value} out of range")
    return value


def parse_geometry(geo) -> GeoShape | None:
    if geo is None:
        return None
    if not isinstance(geo, dict):
        raise InvalidCoordinate("geo", "expected an object")
    if "point" in geo:
        pt = geo["point"]
        if not isinstance(pt, (list, tuple)) or len(pt) != 2:
            raise InvalidCoordinate("geo", "point must be [lat, lon]")
        return Point(_coord(pt[0], -90, 90, "lat"), _coord(pt[1], -180, 180, "lon"))
    if "bbox" in geo:
        bb = geo["bbox"]
        if not isinstance(bb, (list, tuple)) or len(bb) != 4:
            raise InvalidCoordinate("geo", "bbox must be [min_lon, min_lat, max_lon, max_lat]")
        box = BBox(
            _coord(bb[0], -180, 180, "min_lon"),
            _coord(bb[1], -90, 90, "min_lat"),
            _coord(bb[2], -180, 180, "max_lon"),
            _coord(bb[3], -90, 90, "max_lat"),
        )
        if box.min_lon > box.max_lon or box.min_lat > box.max_lat:
            raise InvalidCoordinate("geo", "bbox corners out of order")
        return box
    raise InvalidCoordinate("geo", "expected 'point' or 'bbox'")


SCHEMA_VERSION = 1


def parse_record(line: bytes | str) -> MessageRecord:
    """Parse and validate one NDJSON line.

    Raises a ``ParseError`` subclass naming the offending field.
    """
    try:
        obj = json.loads(line)
    except (ValueError, UnicodeDecodeError) as exc:
        raise MalformedJson(str(exc)) from None
    if not isinstance(obj, dict):
        raise MalformedJson("top-level value is not an object")

    for name in ("user_id", "timestamp", "text", "lang"):
        if obj.get(name) is None:
            raise MissingField(name)
    if "v" in obj and (isinstance(obj["v"], bool) or obj["v"] != SCHEMA_VERSION):
        raise InvalidField("v", f"unsupported schema version {obj['v']!r}")

    user_id = obj["user_id"]
    if isinstance(user_id, bool) or not isinstance(user_id, (str, int)):
        raise InvalidField("user_id", "expected string")
    text = obj["text"]
    if not isinstance(text, str):
        raise InvalidField("text", "expected string")
    lang = obj["lang"]
    if not isinstance(lang, str) or not _LANG_RE.match(lang := lang.lower()):
        raise InvalidField("lang", f"{obj['lang']!r} is not a two-letter code")
    country = obj.get("country")
    if country is not None:
        if not isinstance(country, str):
            raise InvalidField("country", "expected string")
        country = country.upper() or None
        if country is not None and not _COUNTRY_RE.match(country):
            raise InvalidField("country", f"{obj['country']!r} is not a two-letter code")

    return MessageRecord(
        user_id=str(user_id),
        timestamp=parse_timestamp(obj["timestamp"]),
        text=text,
        lang=lang,
        country=country,
        geometry=parse_geometry(obj.get("geo")),
    )


@dataclass
class IngestReport:
    ingested: int = 0
    rejected: int = 0
    errors: Counter = field(default_factory=Counter)
    partitions: Counter = field(default_factory=Counter)

    def summary(self) -> str:
        return f"ingested={self.ingested} rejected={self.rejected}"


class Store:
    """Append-only partitioned record store rooted at a directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def path(self, lang: str, day: date, country: str = ANY) -> Path:
        return self.root / lang / day.isoformat() / f"{country}.ndjson"

    def langs(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.name for p in self.root.iterdir() if p.is_dir() and _LANG_RE.match(p.name))

    def dates(self, lang: str | None = None) -> list[date]:
        langs = [lang] if lang else self.langs()
        out = set()
        for lg in langs:
            base = self.root / lg
            if not base.is_dir():
                continue
            for p in base.iterdir():
                try:
                    out.add(date.fromisoformat(p.name))
                except ValueError:
                    continue
        return sorted(out)

    def countries(self, lang: str, day: date) -> list[str]:
        base = self.root / lang / day.isoformat()
        if not base.is_dir():
            return []
        return sorted(p.stem for p in base.glob("*.ndjson") if p.stem != ANY)

    def read(self, lang: str, day: date, country: str = ANY) -> Iterator[MessageRecord]:
        p = self.path(lang, day, country)
        if not p.exists():
            return
        with open(p, "rb") as fh:
            for line in fh:
                yield parse_record(line)

    def read_texts(self, lang: str, day: date, country: str = ANY) -> Iterator[str]:
        """Texts only; cheaper than full record parsing for vocabulary builds."""
        p = self.path(lang, day, country)
        if not p.exists():
            return
        loads = json.loads
        with open(p, "rb") as fh:
            for line in fh:
                yield loads(line)["text"]

    def count(self, lang: str, day: date, country: str = ANY) -> int:
        p = self.path(lang, day, country)
        if not p.exists():
            return 0
        with open(p, "rb") as fh:
            return sum(1 for _ in fh)

    def read_day(self, day: date, langs: Iterable[str] | None = None) -> Iterator[MessageRecord]:
        for lang in langs if langs is not None else self.langs():
            yield from self.read(lang, day, ANY)

    def write(self, records: Iterable[MessageRecord], flush_every: int = 200_000) -> IngestReport:
        """Append records to their partitions. Buffered; partition order follows input order."""
        report = IngestReport()
        buffers: dict[tuple, list[str]] = {}
        pending = 0
        for rec in records:
            line = rec.to_json()
            day = rec.day
            keys = [(rec.lang, day, ANY)]
            if rec.country is not None:
                keys.append((rec.lang, day, rec.country))
            for key in keys:
                buffers.setdefault(key, []).append(line)
                report.partitions[key] += 1
            report.ingested += 1
            pending += 1
            if pending >= flush_every:
                self._flush(buffers)
                pending = 0
        self._flush(buffers)
        return report

    def _flush(self, buffers: dict[tuple, list[str]]) -> None:
        for (lang, day, country), lines in buffers.items():
            if not lines:
                continue
            p = self.path(lang, day, country)
            p.parent.mkdir(parents=True, exist_ok=True)
            with open(p, "a", encoding="utf-8") as fh:
                fh.write("\n".join(lines))
                fh.write("\n")
            lines.clear()


def iter_parsed(lines: Iterable[bytes | str], report: IngestReport) -> Iterator[MessageRecord]:
    """Parse lines, skipping and counting rejects in ``report``."""
    for line in lines:
        if not line.strip():
            continue
        try:
            yield parse_record(line)
        except (MalformedJson, MissingField, InvalidField, InvalidCoordinate, InvalidTimestamp) as exc:
            report.rejected += 1
            report.errors[type(exc).__name__] += 1


def ingest(lines: Iterable[bytes | str], store: Store) -> IngestReport:
    report = IngestReport()
    written = store.write(iter_parsed(lines, report))
    report.ingested = written.ingested
    report.partitions = written.partitions
    return report


def partition(records: Iterable[MessageRecord]) -> dict[tuple, list[MessageRecord]]:
    """In-memory partitioning with the same keys as the on-disk store."""
    out: dict[tuple, list[MessageRecord]] = {}
    for rec in records:
        out.setdefault((rec.day, rec.lang, ANY), []).append(rec)
        if rec.country is not None:
            out.setdefault((rec.day, rec.lang, rec.country), []).append(rec)
    return out
