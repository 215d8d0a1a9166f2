"""In-memory application state as a pure fold over the event log.

Entity records are kept as JSON-ready dicts (money and distances as strings)
so canonical serialization is a plain sorted-key dump. Apply functions read
only the event payload, never the wall clock, which makes any replay of the
same log byte-identical.
"""

import json

from ..errors import CorruptLog
from ..geo import GeoPoint
from ..tracking import IngestResult, TelemetryMsg, TrackStore
from .auth import Role


class AppState:
    def __init__(self):
        self.accounts = {}       # account_id -> record
        self.logins = {}         # login -> account_id
        self.vehicles = {}
        self.drivers = {}
        self.requests = {}
        self.trips = {}
        self.trip_by_request = {}
        self.payments = {}
        self.payment_by_trip = {}
        self.reviews = []
        self.review_trips = set()
        self.notifications = {}  # driver_id -> list of records
        self.tracks = TrackStore()
        self.seeded = set()
        self.counters = {}

    # ---- identity helpers -------------------------------------------------

    def make_id(self, prefix: str) -> str:
        return f"{prefix}-{self.counters.get(prefix, 0) + 1:04d}"

    def _take_id(self, entity_id: str) -> None:
        prefix, _, suffix = entity_id.rpartition("-")
        self.counters[prefix] = max(self.counters.get(prefix, 0), int(suffix))

    def bootstrap_admin(self, login: str, salt_hex: str, hash_hex: str) -> None:
        """Genesis account; present before any event and never logged."""
        self.accounts["admin"] = {
            "accountId": "admin", "login": login, "name": "Administrator",
            "role": Role.ADMIN.value, "salt": salt_hex, "hash": hash_hex,
            "createdMs": 0,
        }
        self.logins[login] = "admin"

    # ---- fold -------------------------------------------------------------

    def apply(self, record) -> None:
        handler = _APPLY.get(record.kind)
        if handler is None:
            raise CorruptLog(record.seq, f"unknown event kind {record.kind!r}")
        try:
            handler(self, record.payload)
        except (KeyError, TypeError, ValueError) as err:
            raise CorruptLog(record.seq, f"bad {record.kind} payload: {err}") from None

    def canonical_bytes(self) -> bytes:
        """Deterministic snapshot of everything the event log determines."""
        doc = {
            "accounts": self.accounts,
            "vehicles": self.vehicles,
            "drivers": self.drivers,
            "requests": self.requests,
            "trips": self.trips,
            "payments": self.payments,
            "reviews": self.reviews,
            "notifications": self.notifications,
            "tracks": {
                vid: {
                    "points": [[p.point.lat, p.point.lon, p.timestamp]
                               for p in self.tracks.track(vid)],
                    "marks": list(self.tracks.last_marks(vid)),
                }
                for vid in self.tracks.vehicle_ids()
            },
            "seeded": sorted(self.seeded),
            "counters": self.counters,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"),
                          allow_nan=False).encode()


def _register_account(state, p, role, extra=()):
    record = {
        "accountId": p["accountId"], "login": p["login"], "name": p["name"],
        "role": role.value, "salt": p["salt"], "hash": p["hash"],
        "createdMs": p["ts"],
    }
    for field in extra:
        record[field] = p[field]
    state.accounts[p["accountId"]] = record
    state.logins[p["login"]] = p["accountId"]
    state._take_id(p["accountId"])


def _customer_registered(state, p):
    _register_account(state, p, Role.CUSTOMER)


def _provider_registered(state, p):
    _register_account(state, p, Role.PROVIDER)
    state.accounts[p["accountId"]]["status"] = "Pending"


def _driver_registered(state, p):
    _register_account(state, p, Role.DRIVER, extra=("providerId",))
    state.drivers[p["accountId"]] = {
        "driverId": p["accountId"], "providerId": p["providerId"],
        "name": p["name"], "login": p["login"], "status": "Free",
    }


def _provider_approved(state, p):
    state.accounts[p["providerId"]]["status"] = "Approved"


def _vehicle_added(state, p):
    state.vehicles[p["vehicleId"]] = {
        "vehicleId": p["vehicleId"], "providerId": p["providerId"],
        "type": p["type"], "costPerKm": p["costPerKm"],
        "lat": p["lat"], "lon": p["lon"], "status": "Available",
        "createdMs": p["ts"],
    }
    state._take_id(p["vehicleId"])


def _vehicle_status_set(state, p):
    state.vehicles[p["vehicleId"]]["status"] = p["status"]


def _request_submitted(state, p):
    state.requests[p["requestId"]] = {
        "requestId": p["requestId"], "customerId": p["customerId"],
        "pickup": dict(p["pickup"]), "dropoff": dict(p["dropoff"]),
        "vehicleType": p["vehicleType"], "requestedTime": p["requestedTime"],
        "maxRadiusKm": p["maxRadiusKm"], "status": "Pending",
        "createdMs": p["ts"],
    }
    state._take_id(p["requestId"])


def _request_rejected(state, p):
    record = state.requests[p["requestId"]]
    record["status"] = "Rejected"
    record["reason"] = p["reason"]


def _request_allocated(state, p):
    record = state.requests[p["requestId"]]
    record["status"] = "Allocated"
    record["vehicleId"] = p["vehicleId"]
    record["driverId"] = p["driverId"]


def _trip_planned(state, p):
    state.trips[p["tripId"]] = {
        "tripId": p["tripId"], "requestId": p["requestId"],
        "customerId": p["customerId"], "providerId": p["providerId"],
        "vehicleId": p["vehicleId"], "driverId": p["driverId"],
        "pickup": dict(p["pickup"]), "dropoff": dict(p["dropoff"]),
        "plannedKm": p["plannedKm"], "quotedCost": p["quotedCost"],
        "scheduledStartMs": p["scheduledStartMs"], "state": "Scheduled",
        "createdMs": p["ts"], "startedMs": None, "completedMs": None,
        "actualKm": None, "finalCost": None, "fuelUnits": None,
    }
    state.trip_by_request[p["requestId"]] = p["tripId"]
    state.vehicles[p["vehicleId"]]["status"] = "Reserved"
    state.drivers[p["driverId"]]["status"] = "Assigned"
    state._take_id(p["tripId"])


def _trip_started(state, p):
    trip = state.trips[p["tripId"]]
    trip["state"] = "InTransit"
    trip["startedMs"] = p["ts"]
    state.vehicles[trip["vehicleId"]]["status"] = "InTransit"


def _trip_completed(state, p):
    trip = state.trips[p["tripId"]]
    trip["state"] = "Completed"
    trip["completedMs"] = p["ts"]
    trip["actualKm"] = p["actualKm"]
    trip["finalCost"] = p["finalCost"]
    trip["fuelUnits"] = p["fuelUnits"]
    state.vehicles[trip["vehicleId"]]["status"] = "Available"
    state.drivers[trip["driverId"]]["status"] = "Free"


def _payment_recorded(state, p):
    state.payments[p["paymentId"]] = {
        "paymentId": p["paymentId"], "tripId": p["tripId"],
        "customerId": p["customerId"], "providerId": p["providerId"],
        "amount": p["amount"], "status": "Recorded", "recordedMs": p["ts"],
    }
    state.payment_by_trip[p["tripId"]] = p["paymentId"]
    state._take_id(p["paymentId"])


def _review_submitted(state, p):
    state.reviews.append({
        "reviewId": p["reviewId"], "tripId": p["tripId"],
        "customerId": p["customerId"], "providerId": p["providerId"],
        "vehicleId": p["vehicleId"], "stars": p["stars"], "text": p["text"],
        "createdMs": p["ts"],
    })
    state.review_trips.add(p["tripId"])
    state._take_id(p["reviewId"])


def _notification_sent(state, p):
    state.notifications.setdefault(p["driverId"], []).append({
        "notificationId": p["notificationId"], "providerId": p["providerId"],
        "driverId": p["driverId"], "tripId": p.get("tripId"),
        "message": p["message"], "sentMs": p["ts"],
    })
    state._take_id(p["notificationId"])


def _telemetry_accepted(state, p):
    msg = TelemetryMsg(p["vehicleId"], GeoPoint(p["lat"], p["lon"]),
                       p["ts"], p["seq"])
    if state.tracks.ingest(msg) is not IngestResult.ACCEPTED:
        raise ValueError("logged fix is stale against the replayed track")


def _scenario_seeded(state, p):
    state.seeded.add(p["name"])


_APPLY = {
    "account.customer_registered": _customer_registered,
    "account.provider_registered": _provider_registered,
    "account.driver_registered": _driver_registered,
    "provider.approved": _provider_approved,
    "vehicle.added": _vehicle_added,
    "vehicle.status_set": _vehicle_status_set,
    "request.submitted": _request_submitted,
    "request.rejected": _request_rejected,
    "request.allocated": _request_allocated,
    "trip.planned": _trip_planned,
    "trip.started": _trip_started,
    "trip.completed": _trip_completed,
    "payment.recorded": _payment_recorded,
    "review.submitted": _review_submitted,
    "notification.sent": _notification_sent,
    "telemetry.accepted": _telemetry_accepted,
    "scenario.seeded": _scenario_seeded,
}
