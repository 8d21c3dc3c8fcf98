"""Seeded synthetic tweet streams for pipeline tests and experiments.

Profiles
--------
static
    every user tweets from home only; no trips.
commuters
    a weekday-dependent share of each user group goes home -> work -> home,
    producing exactly two trips per moving user and day.
mixed-drop
    commuters with the moving share cut by ``drop`` percent from day ``at`` on.

The number of moving users per (group, day) is fixed by the weekday, not
sampled, so the baseline of a weekday is exact and a drop shows up as a flat
plateau.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from typing import Iterator

PROFILES = ("commuters", "static", "mixed-drop")

# share of each group moving on Mon..Sun
MOVING_SHARE = (0.8, 0.8, 0.8, 0.8, 0.75, 0.5, 0.4)

# name, country, lang, lat, lon, weight
CITIES = (
    ("cdmx", "MX", "es", 19.4326, -99.1332, 0.30),
    ("guadalajara", "MX", "es", 20.6597, -103.3496, 0.10),
    ("tijuana", "MX", "es", 32.5149, -117.0382, 0.05),
    ("new_york", "US", "en", 40.7128, -74.0060, 0.20),
    ("san_diego", "US", "en", 32.7157, -117.1611, 0.10),
    ("toronto", "CA", "en", 43.6532, -79.3832, 0.15),
    ("vancouver", "CA", "en", 49.2827, -123.1207, 0.10),
)
CROSS_BORDER = ("tijuana", "san_diego")

WORDS = {
    "es": (
        "el la los las de que y en un una por con para como más pero muy hoy día noche casa "
        "trabajo amigos feliz gracias vida tiempo mañana calle ciudad comida café lluvia sol "
        "fútbol partido música fiesta familia mamá papá escuela tráfico metro camión ya llegué"
    ).split(),
    "en": (
        "the a and of to in is it you that for on with this my so just love day night home "
        "work friends happy thanks life time today morning street city food coffee rain sun "
        "game music party family school traffic subway bus finally here"
    ).split(),
}
EVENT_WORDS = {
    (2, 14): {"en": ["valentine's", "valentines", "love", "roses", "date"], "es": ["amor", "san", "valentín"]},
    (5, 10): {"es": ["madre", "mamá", "madres", "felicidades"], "en": ["mom"]},
}
EMOJIS = ("😀", "😂", "❤", "👍🏽", "🔥", "🎉", "🌮", "🚗")
MENTIONS = ("@ana", "@juan_p", "@newsdesk", "@maria22")
URLS = ("http://t.co/abc123", "https://example.org/x?y=1", "www.example.com/page")

M_PER_DEG_LAT = 111_320.0


@dataclass(frozen=True)
class SynthConfig:
    profile: str = "commuters"
    n_users: int = 200
    n_days: int = 120
    seed: int = 42
    start: date = date(2019, 11, 1)
    drop: float = 60.0
    at: int = 40
    point_share: float = 0.3
    cross_border_share: float = 0.03
    chatter: float = 1.0
    places_per_city: int = 49

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}; choose from {PROFILES}")
        if self.n_users < 1 or self.n_days < 1:
            raise ValueError("n_users and n_days must be positive")


def _bbox(lat, lon, half_m):
    dlat = half_m / M_PER_DEG_LAT
    dlon = half_m / (M_PER_DEG_LAT * math.cos(math.radians(lat)))
    return [round(lon - dlon, 6), round(lat - dlat, 6), round(lon + dlon, 6), round(lat + dlat, 6)]


def _places(rng: random.Random, lat, lon, n):
    side = int(math.ceil(math.sqrt(n)))
    spacing = 1500.0
    out = []
    for k in range(n):
        i, j = divmod(k, side)
        plat = lat + (i - side / 2) * spacing / M_PER_DEG_LAT
        plon = lon + (j - side / 2) * spacing / (M_PER_DEG_LAT * math.cos(math.radians(lat)))
        half = rng.uniform(600, 700) if rng.random() < 0.1 else rng.uniform(100, 350)
        box = _bbox(plat, plon, half)
        out.append((box, ((box[1] + box[3]) / 2, (box[0] + box[2]) / 2)))
    return out


def _jitter(rng, lat, lon, radius_m=20.0):
    r = radius_m * math.sqrt(rng.random())
    t = rng.uniform(0, 2 * math.pi)
    dlat = r * math.cos(t) / M_PER_DEG_LAT
    dlon = r * math.sin(t) / (M_PER_DEG_LAT * math.cos(math.radians(lat)))
    return [round(lat + dlat, 7), round(lon + dlon, 7)]


def _text(rng: random.Random, lang: str, day: date) -> str:
    words = rng.choices(WORDS[lang], k=rng.randint(3, 10))
    event = EVENT_WORDS.get((day.month, day.day), {}).get(lang)
    if event and rng.random() < 0.7:
        words[rng.randrange(len(words))] = rng.choice(event)
    if rng.random() < 0.2:
        words.insert(0, rng.choice(MENTIONS))
    if rng.random() < 0.15:
        words.append(rng.choice(URLS))
    if rng.random() < 0.2:
        words.append(rng.choice(EMOJIS))
    if rng.random() < 0.1:
        words.append("#" + rng.choice(WORDS[lang]))
    text = " ".join(words)
    if rng.random() < 0.3:
        text = text.capitalize() + rng.choice("!.?")
    return text


@dataclass
class _User:
    uid: str
    group: str
    rank: int
    lang: str
    home: tuple
    work: tuple
    home_country: str
    work_country: str


def _build_users(cfg: SynthConfig, rng: random.Random):
    places = {c[0]: _places(rng, c[3], c[4], cfg.places_per_city) for c in CITIES}
    city_info = {c[0]: c for c in CITIES}
    weights = [c[5] for c in CITIES]
    users: list[_User] = []
    group_sizes: dict[str, int] = {}
    for u in range(cfg.n_users):
        city = rng.choices(CITIES, weights)[0]
        name, country, lang = city[0], city[1], city[2]
        work_city = name
        group = country
        if name == CROSS_BORDER[0] and rng.random() < cfg.cross_border_share / city[5]:
            work_city = CROSS_BORDER[1]
            group = "XB"
        if country == "US" and rng.random() < 0.1:
            lang = "es"
        home = rng.choice(places[name])
        work = rng.choice([p for p in places[work_city] if p is not home])
        rank = group_sizes.get(group, 0)
        group_sizes[group] = rank + 1
        users.append(_User(f"u{u:06d}", group, rank, lang, home, work, country, city_info[work_city][1]))
    return users, group_sizes


def movers(cfg: SynthConfig, group_size: int, day_index: int, weekday: int) -> int:
    """Number of moving users of a group on a given day."""
    if cfg.profile == "static":
        return 0
    m = round(group_size * MOVING_SHARE[weekday])
    if cfg.profile == "mixed-drop" and day_index >= cfg.at:
        m = round(m * (1 - cfg.drop / 100.0))
    return m


def _geo(rng, cfg, place):
    box, (clat, clon) = place
    if rng.random() < cfg.point_share:
        return {"point": _jitter(rng, clat, clon)}
    return {"bbox": box}


def _line(uid, ts, text, lang, country, geo):
    obj = {"user_id": uid, "timestamp": ts.strftime("%Y-%m-%dT%H:%M:%SZ"), "text": text, "lang": lang}
    if country is not None:
        obj["country"] = country
    if geo is not None:
        obj["geo"] = geo
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def synth(cfg: SynthConfig) -> Iterator[str]:
    """Yield NDJSON lines, day by day, sorted by timestamp then user."""
    rng = random.Random(cfg.seed)
    users, group_sizes = _build_users(cfg, rng)
    by_group: dict[str, list[_User]] = {}
    for u in users:
        by_group.setdefault(u.group, []).append(u)

    for di in range(cfg.n_days):
        day = cfg.start + timedelta(days=di)
        midnight = datetime(day.year, day.month, day.day, tzinfo=timezone.utc)
        wd = day.weekday()
        moving = set()
        for group, members in by_group.items():
            m = movers(cfg, len(members), di, wd)
            size = len(members)
            offset = (di * 7) % size
            moving.update(u.uid for u in members if (u.rank + offset) % size < m)

        rows = []
        for u in users:
            def at(h0, h1):
                return midnight + timedelta(seconds=rng.randrange(h0 * 3600, h1 * 3600))

            if u.uid in moving:
                stops = [(at(6, 9), u.home, u.home_country), (at(11, 15), u.work, u.work_country),
                         (at(18, 23), u.home, u.home_country)]
            else:
                stops = [(at(8, 22), u.home, u.home_country) for _ in range(rng.randint(1, 2))]
            for ts, place, country in stops:
                rows.append((ts, u.uid, _text(rng, u.lang, day), u.lang, country, _geo(rng, cfg, place)))
            for _ in range(int(cfg.chatter * rng.randint(0, 2))):
                rows.append((at(0, 24), u.uid, _text(rng, u.lang, day), u.lang, None, None))
        rows.sort(key=lambda r: (r[0], r[1]))
        for ts, uid, text, lang, country, geo in rows:
            yield _line(uid, ts, text, lang, country, geo)
