"""Geospatial primitives: great-circle distance, route length, path interpolation.

All math assumes a spherical Earth with mean radius 6371.0088 km. Points are
validated once, at construction; everything downstream can assume they are
in range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidLocation, InvalidParam, NonMonotonicTrack, OutOfRange

EARTH_RADIUS_KM = 6371.0088


@dataclass(frozen=True)
class GeoPoint:
    """A WGS-84 coordinate in decimal degrees."""

    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise InvalidLocation(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise InvalidLocation(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise InvalidLocation(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class TrackPoint:
    """A timestamped position fix."""

    point: GeoPoint
    timestamp: int  # milliseconds since epoch

    def __post_init__(self):
        if self.timestamp < 0 or int(self.timestamp) != self.timestamp:
            raise InvalidParam(f"timestamp must be a non-negative integer, got {self.timestamp}")


class Polyline:
    """An ordered path of at least two points, no two consecutive identical."""

    __slots__ = ("points",)

    def __init__(self, points: Iterable[GeoPoint]):
        pts = tuple(points)
        if len(pts) < 2:
            raise InvalidParam(f"polyline needs at least 2 points, got {len(pts)}")
        for a, b in zip(pts, pts[1:]):
            if a == b:
                raise InvalidParam(f"consecutive identical points at {a}")
        self.points = pts

    def length_km(self) -> float:
        return sum(haversine_km(a, b) for a, b in zip(self.points, self.points[1:]))

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        return isinstance(other, Polyline) and self.points == other.points


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points, in km."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    d_phi = math.radians(b.lat - a.lat)
    d_lambda = math.radians(b.lon - a.lon)
    h = math.sin(d_phi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(d_lambda / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def route_length_km(track: Sequence[TrackPoint]) -> float:
    """Total haversine length over consecutive fixes; 0 for fewer than 2 fixes.

    Timestamps must strictly increase.
    """
    for prev, cur in zip(track, track[1:]):
        if cur.timestamp <= prev.timestamp:
            raise NonMonotonicTrack(
                f"timestamp {cur.timestamp} does not follow {prev.timestamp}"
            )
    return sum(haversine_km(p.point, c.point) for p, c in zip(track, track[1:]))


def interpolate_along(path: Polyline, fraction: float) -> GeoPoint:
    """Point at `fraction` of the path's cumulative length, linear in lat/lon.

    fraction 0 is the first point, 1 the last.
    """
    if not 0.0 <= fraction <= 1.0:
        raise OutOfRange(f"fraction {fraction} outside [0, 1]")
    pts = path.points
    if fraction == 0.0:
        return pts[0]
    if fraction == 1.0:
        return pts[-1]
    seg_lens = [haversine_km(a, b) for a, b in zip(pts, pts[1:])]
    target = fraction * sum(seg_lens)
    acc = 0.0
    for i, seg in enumerate(seg_lens):
        last = i == len(seg_lens) - 1
        if acc + seg >= target or last:
            a, b = pts[i], pts[i + 1]
            t = min(1.0, (target - acc) / seg)
            return GeoPoint(a.lat + t * (b.lat - a.lat), a.lon + t * (b.lon - a.lon))
        acc += seg
    return pts[-1]
