"""Great-circle distance and an exact nearest-neighbour grid index."""

from __future__ import annotations

import math
from typing import Sequence

from .errors import EmptyLandmarkSet
from .records import Point

EARTH_RADIUS_M = 6_371_000.0

_RAD = math.pi / 180.0


def haversine(a: Point, b: Point) -> float:
    """Distance in metres between two (lat, lon) points on a sphere of radius 6,371 km."""
    lat1, lon1 = a[0] * _RAD, a[1] * _RAD
    lat2, lon2 = b[0] * _RAD, b[1] * _RAD
    h = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def destination(origin: Point, bearing_deg: float, distance_m: float) -> Point:
    """Point reached from ``origin`` travelling ``distance_m`` along a great circle."""
    lat1, lon1 = origin[0] * _RAD, origin[1] * _RAD
    brg = bearing_deg * _RAD
    d = distance_m / EARTH_RADIUS_M
    lat2 = math.asin(math.sin(lat1) * math.cos(d) + math.cos(lat1) * math.sin(d) * math.cos(brg))
    lon2 = lon1 + math.atan2(
        math.sin(brg) * math.sin(d) * math.cos(lat1), math.cos(d) - math.sin(lat1) * math.sin(lat2)
    )
    lon2 = (lon2 + math.pi) % (2 * math.pi) - math.pi
    return Point(lat2 / _RAD, lon2 / _RAD)


def _cell(p: Point) -> tuple[int, int]:
    return math.floor(p[0]), math.floor(p[1]) % 360


class GridIndex:
    """Points bucketed into 1x1 degree cells; nearest queries expand ring by ring.

    A search stops once the best distance found is strictly below a lower
    bound on the distance to every unvisited cell, so results equal a linear
    scan, including the lowest-id tie break.
    """

    _SLACK_REL = 1e-9
    _SLACK_ABS = 1e-3

    def __init__(self, points: Sequence[Point]):
        self.points = [Point(float(p[0]), float(p[1])) for p in points]
        self.cells: dict[tuple[int, int], list[int]] = {}
        for i, p in enumerate(self.points):
            self.cells.setdefault(_cell(p), []).append(i)

    def __len__(self) -> int:
        return len(self.points)

    def _lower_bound(self, ring: int, cos_lat: float) -> float:
        # cells outside the ring differ by > ring degrees in latitude or longitude
        lat_bound = EARTH_RADIUS_M * ring * _RAD
        lon_bound = EARTH_RADIUS_M * math.asin(min(1.0, math.sin(min(ring, 90) * _RAD) * cos_lat))
        bound = min(lat_bound, lon_bound)
        return bound * (1 - self._SLACK_REL) - self._SLACK_ABS

    def nearest(self, query: Point) -> tuple[int, float]:
        """Return ``(index, distance_m)`` of the closest point; ties go to the lowest index."""
        if not self.points:
            raise EmptyLandmarkSet("no landmarks to search")
        qi, qj = _cell(query)
        cos_lat = math.cos(query[0] * _RAD)
        best_i, best_d = -1, math.inf
        seen: set[tuple[int, int]] = set()
        pts = self.points
        occupied = len(self.cells)
        scanned = 0
        for ring in range(0, 182):
            if 8 * ring > occupied:
                cells = [c for c in self.cells if c not in seen and self._chebyshev(c, qi, qj) <= ring]
            else:
                cells = self._ring_cells(qi, qj, ring)
            for ci, cj in cells:
                if (ci, cj) in seen:
                    continue
                seen.add((ci, cj))
                members = self.cells.get((ci, cj))
                if members is None:
                    continue
                scanned += 1
                for idx in members:
                    d = haversine(query, pts[idx])
                    if d < best_d or (d == best_d and idx < best_i):
                        best_i, best_d = idx, d
            if scanned == occupied or best_d < self._lower_bound(ring, cos_lat):
                break
        return best_i, best_d

    @staticmethod
    def _chebyshev(cell, qi, qj) -> int:
        dj = abs(cell[1] - qj)
        return max(abs(cell[0] - qi), min(dj, 360 - dj))

    @staticmethod
    def _ring_cells(qi: int, qj: int, ring: int):
        if ring == 0:
            yield qi, qj
            return
        for di in range(-ring, ring + 1):
            ci = qi + di
            if ci < -90 or ci > 90:
                continue
            if abs(di) == ring:
                for dj in range(-ring, ring + 1):
                    yield ci, (qj + dj) % 360
            else:
                yield ci, (qj - ring) % 360
                yield ci, (qj + ring) % 360


def brute_force_nearest(points: Sequence[Point], query: Point) -> tuple[int, float]:
    """Linear scan with the same tie rule as ``GridIndex.nearest``."""
    if not points:
        raise EmptyLandmarkSet("no landmarks to search")
    best_i, best_d = -1, math.inf
    for i, p in enumerate(points):
        d = haversine(query, p)
        if d < best_d:
            best_i, best_d = i, d
    return best_i, best_d
