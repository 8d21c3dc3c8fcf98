import json
from collections import Counter
from datetime import date

import pytest

from geolex.mobility import build_landmarks, day_od
from geolex.records import partition, parse_record
from geolex.synth import SynthConfig, movers, synth


def records_of(cfg):
    return [parse_record(line) for line in synth(cfg)]


def test_same_seed_same_bytes():
    cfg = SynthConfig(n_users=30, n_days=5, seed=3)
    assert list(synth(cfg)) == list(synth(cfg))
    assert list(synth(cfg)) != list(synth(SynthConfig(n_users=30, n_days=5, seed=4)))


def test_lines_parse_and_are_sorted_per_day():
    recs = records_of(SynthConfig(n_users=20, n_days=3))
    keys = [(r.timestamp, r.user_id) for r in recs]
    assert keys == sorted(keys)
    assert {r.lang for r in recs} <= {"es", "en"}


def test_static_profile_has_no_trips():
    recs = records_of(SynthConfig("static", n_users=60, n_days=4))
    lset = build_landmarks(recs)
    for day in sorted({r.day for r in recs}):
        assert day_od(day, [r for r in recs if r.day == day], lset).total == 0


def test_commuters_move():
    recs = records_of(SynthConfig(n_users=60, n_days=2))
    lset = build_landmarks(recs)
    day = recs[0].day
    assert day_od(day, [r for r in recs if r.day == day], lset).total > 0


@pytest.mark.parametrize("size, day, wd, expected", [(100, 0, 0, 80), (100, 50, 0, 32), (100, 39, 6, 40), (100, 40, 6, 16)])
def test_movers_drop(size, day, wd, expected):
    cfg = SynthConfig("mixed-drop", drop=60, at=40)
    assert movers(cfg, size, day, wd) == expected


def test_chatter_has_no_geo_or_country():
    recs = records_of(SynthConfig(n_users=20, n_days=2))
    bare = [r for r in recs if r.geometry is None]
    assert bare and all(r.country is None for r in bare)


def test_country_partitions_present():
    recs = records_of(SynthConfig(n_users=200, n_days=1))
    parts = partition(recs)
    countries = {country for (_, _, country) in parts}
    assert {"MX", "US", "CA", "any"} <= countries


def test_event_words_on_the_day():
    cfg = SynthConfig(n_users=80, n_days=2, start=date(2020, 2, 13))
    by_day = {}
    for line in synth(cfg):
        obj = json.loads(line)
        by_day.setdefault(obj["timestamp"][:10], Counter()).update(obj["text"].lower().split())
    assert by_day["2020-02-14"]["valentín"] > 0
    assert by_day["2020-02-13"]["valentín"] == 0


def test_bad_profile():
    with pytest.raises(ValueError):
        SynthConfig("teleport")
