"""Telemetry ingestion, per-vehicle tracks, and the GPS transmitter simulator.

A fix is appended only when both its sequence number and timestamp move
forward; duplicates and reordered bursts are rejected, never inserted, so a
track replays identically from its accepted-message log.
"""

import json
import threading
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import InvalidParam
from .geo import GeoPoint, Polyline, TrackPoint, interpolate_along

MAX_TRACK_POINTS = 100_000


class IngestResult(Enum):
    ACCEPTED = "Accepted"
    REJECTED_STALE = "RejectedStale"


def _check_counter(value, what: str) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise InvalidParam(f"{what} must be a non-negative integer, got {value!r}")


@dataclass(frozen=True)
class TelemetryMsg:
    vehicle_id: str
    point: GeoPoint
    timestamp: int  # milliseconds since epoch
    seq: int

    def __post_init__(self):
        if not isinstance(self.vehicle_id, str) or not self.vehicle_id:
            raise InvalidParam("vehicle_id must be a non-empty string")
        if not isinstance(self.point, GeoPoint):
            raise InvalidParam("point must be a GeoPoint")
        _check_counter(self.timestamp, "timestamp")
        _check_counter(self.seq, "seq")


class _Track:
    __slots__ = ("lock", "points", "last_seq", "last_ts")

    def __init__(self, cap: int):
        self.lock = threading.Lock()
        self.points = deque(maxlen=cap)
        self.last_seq = -1
        self.last_ts = -1


class TrackStore:
    """Per-vehicle fix history with bounded memory (oldest fixes evicted)."""

    def __init__(self, max_points: int = MAX_TRACK_POINTS):
        if not isinstance(max_points, int) or max_points < 1:
            raise InvalidParam(f"max_points must be >= 1, got {max_points!r}")
        self._max_points = max_points
        self._tracks = {}
        self._lock = threading.Lock()

    def _track_for(self, vehicle_id: str) -> _Track:
        with self._lock:
            track = self._tracks.get(vehicle_id)
            if track is None:
                track = self._tracks[vehicle_id] = _Track(self._max_points)
            return track

    def ingest(self, msg: TelemetryMsg) -> IngestResult:
        """Accept a fix iff both seq and timestamp are strictly newer."""
        track = self._track_for(msg.vehicle_id)
        with track.lock:
            if msg.seq <= track.last_seq or msg.timestamp <= track.last_ts:
                return IngestResult.REJECTED_STALE
            track.points.append(TrackPoint(msg.point, msg.timestamp))
            track.last_seq = msg.seq
            track.last_ts = msg.timestamp
            return IngestResult.ACCEPTED

    def current_position(self, vehicle_id: str) -> Optional[TrackPoint]:
        """Latest accepted fix, or None for a vehicle that never reported."""
        with self._lock:
            track = self._tracks.get(vehicle_id)
        if track is None:
            return None
        with track.lock:
            return track.points[-1] if track.points else None

    def track(self, vehicle_id: str):
        """Point-in-time snapshot of a vehicle's stored fixes."""
        with self._lock:
            track = self._tracks.get(vehicle_id)
        if track is None:
            return ()
        with track.lock:
            return tuple(track.points)

    def last_marks(self, vehicle_id: str):
        """(last_seq, last_ts) of the accepted stream; (-1, -1) before any fix."""
        with self._lock:
            track = self._tracks.get(vehicle_id)
        if track is None:
            return (-1, -1)
        with track.lock:
            return (track.last_seq, track.last_ts)

    def vehicle_ids(self):
        with self._lock:
            return sorted(vid for vid, t in self._tracks.items() if t.points)


def ingest(msg: TelemetryMsg, store: TrackStore) -> IngestResult:
    return store.ingest(msg)


def current_position(vehicle_id: str, store: TrackStore) -> Optional[TrackPoint]:
    return store.current_position(vehicle_id)


def simulate_transmitter(vehicle_id: str, path: Polyline, speed_kmh,
                         interval_ms: int, start_ms: int = 0):
    """Fixes a vehicle driving `path` at constant speed would transmit.

    One message per interval at the matching fraction of the path; the run
    always opens at the path start and closes exactly at the path end.
    """
    if not isinstance(path, Polyline):
        raise InvalidParam("path must be a Polyline")
    if not (isinstance(speed_kmh, (int, float)) and speed_kmh > 0):
        raise InvalidParam(f"speed must be positive, got {speed_kmh!r}")
    if not isinstance(interval_ms, int) or isinstance(interval_ms, bool) or interval_ms <= 0:
        raise InvalidParam(f"interval must be a positive integer, got {interval_ms!r}")
    _check_counter(start_ms, "start_ms")
    total_km = path.length_km()
    messages = []
    i = 0
    while True:
        fraction = min(1.0, i * interval_ms * speed_kmh / 3_600_000 / total_km)
        messages.append(TelemetryMsg(vehicle_id, interpolate_along(path, fraction),
                                     start_ms + i * interval_ms, i))
        if fraction >= 1.0:
            return messages
        i += 1


def to_wire(msg: TelemetryMsg) -> dict:
    """Telemetry record in its JSON field layout."""
    return {"vehicleId": msg.vehicle_id, "lat": msg.point.lat,
            "lon": msg.point.lon, "ts": msg.timestamp, "seq": msg.seq}


def from_wire(obj) -> TelemetryMsg:
    if not isinstance(obj, dict):
        raise InvalidParam(f"telemetry record must be an object, got {type(obj).__name__}")
    try:
        vehicle_id = obj["vehicleId"]
        lat, lon = obj["lat"], obj["lon"]
        ts, seq = obj["ts"], obj["seq"]
    except KeyError as missing:
        raise InvalidParam(f"telemetry record missing field {missing}") from None
    for value, what in ((lat, "lat"), (lon, "lon")):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise InvalidParam(f"{what} must be a number, got {value!r}")
    return TelemetryMsg(vehicle_id, GeoPoint(float(lat), float(lon)), ts, seq)


def wire_lines(messages):
    """One compact JSON record per message, ready to join with newlines."""
    return [json.dumps(to_wire(m), separators=(",", ":")) for m in messages]


def parse_wire_line(line: str) -> TelemetryMsg:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as err:
        raise InvalidParam(f"bad telemetry line: {err}") from None
    return from_wire(obj)
