"""Landmark construction, trip detection and origin-destination aggregation."""

from __future__ import annotations

import csv
import io
import struct
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import DataError, EmptyLandmarkSet, NoGeotaggedData
from .geo import GridIndex, haversine
from .records import BBox, MessageRecord, Point, Store

LANDMARK_RATE = 0.01
MIN_TRIP_M = 100.0
UNKNOWN_COUNTRY = "??"
MEASURES = ("inside", "inward", "outward", "overall")


@dataclass(frozen=True)
class Landmark:
    id: int
    bbox: BBox
    country: str
    support: int

    @property
    def centroid(self) -> Point:
        return self.bbox.centroid

    @property
    def diagonal_m(self) -> float:
        return haversine(Point(self.bbox.min_lat, self.bbox.min_lon), Point(self.bbox.max_lat, self.bbox.max_lon))


class LandmarkSet:
    """Immutable landmark collection with exact-bbox and nearest-centroid lookup."""

    _MAGIC = b"GLXLMK01"
    _HEADER = struct.Struct("<8sI")
    _ROW = struct.Struct("<I4d2sQ")

    def __init__(self, landmarks: Sequence[Landmark]):
        self.landmarks = list(landmarks)
        if [lm.id for lm in self.landmarks] != list(range(len(self.landmarks))):
            raise ValueError("landmark ids must be dense and ordered 0..n-1")
        self.by_bbox = {lm.bbox: lm.id for lm in self.landmarks}
        self.index = GridIndex([lm.centroid for lm in self.landmarks])

    def __len__(self) -> int:
        return len(self.landmarks)

    def __getitem__(self, i: int) -> Landmark:
        return self.landmarks[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, LandmarkSet) and self.landmarks == other.landmarks

    @property
    def countries(self) -> dict[int, str]:
        return {lm.id: lm.country for lm in self.landmarks}

    def nearest(self, p: Point) -> int:
        return self.index.nearest(p)[0]

    def assign(self, record: MessageRecord) -> tuple[int, Point]:
        return assign_landmark(record, self)

    # --- persistence -------------------------------------------------------

    def to_bytes(self) -> bytes:
        out = [self._HEADER.pack(self._MAGIC, len(self.landmarks))]
        for lm in self.landmarks:
            out.append(self._ROW.pack(lm.id, *lm.bbox, lm.country.encode("ascii"), lm.support))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "LandmarkSet":
        magic, n = cls._HEADER.unpack_from(data, 0)
        if magic != cls._MAGIC:
            raise DataError("not a landmark file")
        off = cls._HEADER.size
        if len(data) != off + n * cls._ROW.size:
            raise DataError("truncated landmark file")
        rows = []
        for k in range(n):
            i, a, b, c, d, country, support = cls._ROW.unpack_from(data, off + k * cls._ROW.size)
            rows.append(Landmark(i, BBox(a, b, c, d), country.decode("ascii"), support))
        return cls(rows)

    CSV_HEADER = ["id", "min_lon", "min_lat", "max_lon", "max_lat", "centroid_lat", "centroid_lon", "country", "support"]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_HEADER)
        for lm in self.landmarks:
            c = lm.centroid
            w.writerow([lm.id, *map(repr, lm.bbox), repr(c.lat), repr(c.lon), lm.country, lm.support])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "LandmarkSet":
        rows = []
        for r in csv.DictReader(io.StringIO(text)):
            bbox = BBox(float(r["min_lon"]), float(r["min_lat"]), float(r["max_lon"]), float(r["max_lat"]))
            rows.append(Landmark(int(r["id"]), bbox, r["country"], int(r["support"])))
        return cls(rows)

    @classmethod
    def load(cls, path: str | Path) -> "LandmarkSet":
        path = Path(path)
        if path.suffix == ".csv":
            return cls.from_csv(path.read_text("utf-8"))
        return cls.from_bytes(path.read_bytes())


def _majority(votes: Counter) -> str | None:
    if not votes:
        return None
    top = max(votes.values())
    return min(c for c, n in votes.items() if n == top)


def build_landmarks(records: Iterable[MessageRecord], rate: float = LANDMARK_RATE) -> LandmarkSet:
    """Keep bounding boxes seen in more records than ``rate`` x days collected for their country.

    A bbox's country is the majority country label of the records carrying
    it (ties to the lexicographically smallest code). Days collected for a
    country are the distinct days with at least one geotagged record from
    it; bboxes with no labelled records are judged against all geotagged days.
    """
    support: Counter = Counter()
    votes: dict[BBox, Counter] = {}
    days: dict[str, set] = {}
    all_days: set = set()
    for rec in records:
        geom = rec.geometry
        if geom is None:
            continue
        day = rec.day
        all_days.add(day)
        if rec.country is not None:
            days.setdefault(rec.country, set()).add(day)
        if isinstance(geom, BBox):
            support[geom] += 1
            v = votes.setdefault(geom, Counter())
            if rec.country is not None:
                v[rec.country] += 1
    if not support:
        raise NoGeotaggedData("no records carry a bounding box")

    frac = Fraction(str(rate))
    kept = []
    for bbox, n in support.items():
        country = _majority(votes[bbox])
        collected = len(days[country]) if country is not None else len(all_days)
        if n > frac * collected:
            kept.append((bbox, country or UNKNOWN_COUNTRY, n))
    kept.sort(key=lambda t: (-t[2], tuple(t[0])))
    return LandmarkSet([Landmark(i, bbox, c, n) for i, (bbox, c, n) in enumerate(kept)])


def landmarks_from_store(store: Store, langs: Iterable[str] | None = None, rate: float = LANDMARK_RATE) -> LandmarkSet:
    langs = list(langs) if langs is not None else store.langs()

    def records():
        for lang in langs:
            for day in store.dates(lang):
                yield from store.read(lang, day)

    return build_landmarks(records(), rate)


def assign_landmark(record: MessageRecord, lset: LandmarkSet) -> tuple[int, Point]:
    """Landmark id and the position used for distance checks.

    Exact bbox hits use the landmark centroid; other bboxes use their own
    centroid and the nearest landmark; points keep their exact position.
    """
    geom = record.geometry
    if geom is None:
        raise ValueError("record has no geometry")
    if not len(lset):
        raise EmptyLandmarkSet("landmark set is empty")
    if isinstance(geom, BBox):
        hit = lset.by_bbox.get(geom)
        pos = geom.centroid
        if hit is not None:
            return hit, pos
        return lset.nearest(pos), pos
    return lset.nearest(geom), geom


class Trip(NamedTuple):
    day: date
    origin: int
    dest: int
    count: int = 1


def detect_trips(records: Sequence[MessageRecord], lset: LandmarkSet, min_distance: float = MIN_TRIP_M) -> list[Trip]:
    """Trips between consecutive same-day messages of one user that moved more than ``min_distance``."""
    recs = sorted((r for r in records if r.geometry is not None), key=lambda r: r.timestamp)
    trips: list[Trip] = []
    prev = None
    for rec in recs:
        lid, pos = assign_landmark(rec, lset)
        if prev is not None:
            p_rec, p_lid, p_pos = prev
            if p_rec.day == rec.day and haversine(p_pos, pos) > min_distance:
                trips.append(Trip(rec.day, p_lid, lid))
        prev = (rec, lid, pos)
    return trips


@dataclass
class ODMatrix:
    day: date
    counts: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["date", "origin", "dest", "count"])
        for (o, d), n in sorted(self.counts.items()):
            w.writerow([self.day.isoformat(), o, d, n])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, day: date | None = None) -> "ODMatrix":
        counts: Counter = Counter()
        for r in csv.DictReader(io.StringIO(text)):
            day = date.fromisoformat(r["date"])
            counts[(int(r["origin"]), int(r["dest"]))] += int(r["count"])
        if day is None:
            raise DataError("OD file has no rows and no date")
        return cls(day, counts)


def od_matrix(day: date, trips: Iterable[Trip]) -> ODMatrix:
    counts: Counter = Counter()
    for t in trips:
        if t.day != day:
            raise ValueError(f"trip on {t.day} passed for {day}")
        counts[(t.origin, t.dest)] += t.count
    return ODMatrix(day, counts)


def day_od(day: date, records: Iterable[MessageRecord], lset: LandmarkSet) -> ODMatrix:
    by_user: dict[str, list[MessageRecord]] = {}
    for rec in records:
        if rec.geometry is not None and rec.day == day:
            by_user.setdefault(rec.user_id, []).append(rec)
    trips: list[Trip] = []
    for user in sorted(by_user):
        trips.extend(detect_trips(by_user[user], lset))
    return od_matrix(day, trips)


_worker_state: dict = {}


def _init_worker(root, lset_bytes, langs):
    _worker_state["store"] = Store(root)
    _worker_state["lset"] = LandmarkSet.from_bytes(lset_bytes)
    _worker_state["langs"] = langs


def _worker_day(day):
    s = _worker_state
    return day_od(day, s["store"].read_day(day, s["langs"]), s["lset"])


def store_od(
    store: Store, lset: LandmarkSet, dates: Iterable[date], langs: Sequence[str] | None = None, jobs: int = 1
) -> list[ODMatrix]:
    """One OD matrix per date, reading every language's ``any`` partition."""
    dates = sorted(set(dates))
    langs = list(langs) if langs is not None else store.langs()
    if jobs > 1 and len(dates) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(str(store.root), lset.to_bytes(), langs)) as pool:
            return list(pool.map(_worker_day, dates))
    return [day_od(d, store.read_day(d, langs), lset) for d in dates]


@dataclass
class MobilitySeries:
    country: str
    inside: dict = field(default_factory=dict)
    inward: dict = field(default_factory=dict)
    outward: dict = field(default_factory=dict)

    @property
    def overall(self) -> dict:
        return {d: self.inside[d] + self.inward[d] + self.outward[d] for d in self.inside}

    def measure(self, name: str) -> dict:
        if name not in MEASURES:
            raise ValueError(f"unknown measure {name!r}")
        return getattr(self, name)

    @property
    def dates(self) -> list[date]:
        return sorted(self.inside)


def country_series(ods: Iterable[ODMatrix], countries: Mapping[int, str]) -> dict[str, MobilitySeries]:
    """Per-country inside/inward/outward counts for each OD day.

    ``countries`` maps landmark id to country; unknown ids count under ``??``.
    Every country seen in ``countries`` gets an entry, zero-filled.
    """
    ods = list(ods)
    names = set(countries.values())
    for od in ods:
        for o, d in od.counts:
            names.add(countries.get(o, UNKNOWN_COUNTRY))
            names.add(countries.get(d, UNKNOWN_COUNTRY))
    out = {c: MobilitySeries(c) for c in sorted(names)}
    for od in ods:
        for s in out.values():
            s.inside[od.day] = s.inward[od.day] = s.outward[od.day] = 0
        for (o, d), n in od.counts.items():
            co = countries.get(o, UNKNOWN_COUNTRY)
            cd = countries.get(d, UNKNOWN_COUNTRY)
            if co == cd:
                out[co].inside[od.day] += n
            else:
                out[co].outward[od.day] += n
                out[cd].inward[od.day] += n
    return out
