"""Role-gated HTTP surface over the event-sourced fleet core.

All mutations go through Service command methods, which append to the event
log and fold the new records into state under one writer lock. Route
authorization is driven by the ROUTES table so every (role, endpoint) pair
has an explicit answer.
"""

import json
import os
import re
import threading
import time
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Optional

from fastapi import Depends, FastAPI, Request, Response
from fastapi.responses import JSONResponse

from ..dispatch import (
    Driver,
    DriverStatus,
    Trip,
    TripEvent,
    TripRequest,
    TripState,
    Vehicle,
    VehicleStatus,
    allocate,
    as_money,
    build_schedule,
    plan_trip,
    set_maintenance,
    transition,
)
from ..errors import (
    AuthFailure,
    CapacityError,
    EmptyFleet,
    FleetlineError,
    IllegalTransition,
    InvalidLocation,
    InvalidParam,
    InvalidState,
    OutOfRange,
    OverlapError,
)
from ..geo import GeoPoint, Polyline, haversine_km
from ..recommend import RatingMatrix, RecommendationQuery, recommend
from ..recommend import CandidateVehicle
from ..reviews import (
    Review,
    classify_review,
    detect_spam_providers,
    provider_star_lists,
    rank_providers,
    sentiment_counts,
)
from ..sealing import make_trip_qr
from ..qrcodec import EcLevel, write_pbm
from ..tracking import from_wire
from .auth import (
    BOOTSTRAP_SALT,
    Role,
    SessionStore,
    burn_verification,
    hash_password,
    new_salt,
    verify_password,
)
from .events import EventLog
from .state import AppState

DEFAULT_PORT = 8080
DEFAULT_ADMIN_LOGIN = "admin"
DEFAULT_ADMIN_PASSWORD = "fleetline-admin"
DEFAULT_QR_PASSPHRASE = "fleetline-dev"

_LOGIN_RE = re.compile(r"^[a-z0-9][a-z0-9._-]{2,63}$")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(f"{status} {code}: {message}")
        self.status = status
        self.code = code
        self.message = message


@dataclass(frozen=True)
class Principal:
    account_id: Optional[str]
    role: Role
    account: Optional[dict]


ANONYMOUS = Principal(None, Role.ANONYMOUS, None)


# ---- body / query validation helpers --------------------------------------

def _need_dict(value, what: str) -> dict:
    if not isinstance(value, dict):
        raise ApiError(422, "InvalidParam", f"{what} must be an object")
    return value


def _field_str(body: dict, field: str, max_len: int = 200) -> str:
    value = body.get(field)
    if not isinstance(value, str) or not value or len(value) > max_len:
        raise ApiError(422, "InvalidParam",
                       f"{field} must be a string of 1..{max_len} characters")
    return value


def _field_int(body: dict, field: str, minimum: int = 0):
    value = body.get(field)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ApiError(422, "InvalidParam", f"{field} must be an integer >= {minimum}")
    return value


def _field_point(body: dict, field: str) -> GeoPoint:
    obj = _need_dict(body.get(field), field)
    lat, lon = obj.get("lat"), obj.get("lon")
    for name, value in (("lat", lat), ("lon", lon)):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ApiError(422, "InvalidLocation", f"{field}.{name} must be a number")
    try:
        return GeoPoint(float(lat), float(lon))
    except InvalidLocation as err:
        raise ApiError(422, "InvalidLocation", str(err)) from None


def _credentials(body: dict):
    login = _field_str(body, "login", 64)
    if not _LOGIN_RE.fullmatch(login):
        raise ApiError(422, "InvalidParam",
                       "login must be 3..64 lowercase letters, digits, dot, dash, underscore")
    password = _field_str(body, "password", 128)
    if len(password) < 8:
        raise ApiError(422, "InvalidParam", "password must be at least 8 characters")
    name = _field_str(body, "name", 100)
    return login, password, name


def _dec_str(value: Decimal) -> str:
    """Fixed-point rendering; str() would emit 0E-8 for zero products."""
    return format(value, "f")


def _money_param(raw, what: str) -> Decimal:
    try:
        value = as_money(raw)
    except InvalidParam as err:
        raise ApiError(422, "InvalidParam", f"{what}: {err}") from None
    if value <= 0:
        raise ApiError(422, "InvalidParam", f"{what} must be positive")
    return value


def _latlon_param(params, required: bool) -> Optional[GeoPoint]:
    lat, lon = params.get("lat"), params.get("lon")
    if lat is None and lon is None:
        if required:
            raise ApiError(422, "InvalidLocation", "lat and lon are required")
        return None
    if lat is None or lon is None:
        raise ApiError(422, "InvalidParam", "lat and lon go together")
    try:
        return GeoPoint(float(lat), float(lon))
    except (TypeError, ValueError):
        raise ApiError(422, "InvalidLocation", "lat and lon must be numbers") from None
    except (InvalidLocation, OutOfRange) as err:
        raise ApiError(422, "InvalidLocation", str(err)) from None


# ---- the service core ------------------------------------------------------

class Service:
    """Event-sourced fleet platform behind the HTTP routes."""

    def __init__(self, data_dir: str, admin_password: str = DEFAULT_ADMIN_PASSWORD,
                 qr_passphrase: str = DEFAULT_QR_PASSPHRASE, clock=None):
        self._clock = clock or (lambda: time.time_ns() // 1_000_000)
        self._lock = threading.RLock()
        self.qr_passphrase = qr_passphrase
        self.state = AppState()
        self.state.bootstrap_admin(
            DEFAULT_ADMIN_LOGIN, BOOTSTRAP_SALT.hex(),
            hash_password(admin_password, BOOTSTRAP_SALT).hex())
        self.log = EventLog(os.path.join(data_dir, "events.log"))
        for record in self.log.open():
            self.state.apply(record)
        self.sessions = SessionStore(self._clock)
        self._fleet_cache = None

    def close(self) -> None:
        self.log.close()

    def now_ms(self) -> int:
        return self._clock()

    def canonical_state(self) -> bytes:
        with self._lock:
            return self.state.canonical_bytes()

    def principal_for(self, account_id: str) -> Principal:
        account = self.state.accounts.get(account_id)
        if account is None:
            raise InvalidParam(f"no account {account_id}")
        return Principal(account_id, Role(account["role"]), account)

    def _append(self, events, now: int):
        records = self.log.append_batch(events, now)
        for record in records:
            self.state.apply(record)
        return records

    # ---- small typed views ------------------------------------------------

    def _typed_vehicle(self, record: dict) -> Vehicle:
        return Vehicle(record["vehicleId"], record["providerId"], record["type"],
                       Decimal(record["costPerKm"]),
                       GeoPoint(record["lat"], record["lon"]),
                       VehicleStatus(record["status"]))

    def _typed_driver(self, record: dict) -> Driver:
        return Driver(record["driverId"], record["providerId"], record["name"],
                      DriverStatus(record["status"]))

    def _typed_trip(self, record: dict) -> Trip:
        pickup = GeoPoint(record["pickup"]["lat"], record["pickup"]["lon"])
        dropoff = GeoPoint(record["dropoff"]["lat"], record["dropoff"]["lon"])
        return Trip(record["tripId"], record["requestId"], record["customerId"],
                    record["vehicleId"], record["driverId"],
                    Polyline([pickup, dropoff]), Decimal(record["plannedKm"]),
                    Decimal(record["quotedCost"]), record["scheduledStartMs"],
                    TripState(record["state"]))

    def _fleet_snapshot(self):
        """(record, position) pairs plus prebuilt recommender candidates.

        State changes only when the log grows, so the snapshot is keyed by
        the last appended seq and rebuilt lazily after any mutation.
        """
        seq = self.log.last_seq
        if self._fleet_cache is not None and self._fleet_cache[0] == seq:
            return self._fleet_cache[1]
        tracked = {}
        for vid in self.state.tracks.vehicle_ids():
            fix = self.state.tracks.current_position(vid)
            if fix is not None:
                tracked[vid] = fix.point
        pairs, candidates, meta = [], [], {}
        for record in self.state.vehicles.values():
            vid = record["vehicleId"]
            position = tracked.get(vid)
            if position is None:
                position = GeoPoint(record["lat"], record["lon"])
            pairs.append((record, position))
            if record["status"] == "Available":
                candidates.append(CandidateVehicle(
                    vid, position, float(Decimal(record["costPerKm"])),
                    True, record["type"]))
                meta[vid] = record
        snapshot = (tuple(pairs), tuple(candidates), meta)
        self._fleet_cache = (seq, snapshot)
        return snapshot

    def _positions(self) -> dict:
        pairs, _, _ = self._fleet_snapshot()
        return {record["vehicleId"]: position for record, position in pairs}

    def _vehicle_position(self, record: dict) -> GeoPoint:
        fix = self.state.tracks.current_position(record["vehicleId"])
        return fix.point if fix is not None else GeoPoint(record["lat"], record["lon"])

    def _review_objs(self):
        return [Review(r["reviewId"], r["customerId"], r["providerId"],
                       r["tripId"], r["text"], r["stars"], r["createdMs"])
                for r in self.state.reviews]

    def _provider_ids(self):
        return [a["accountId"] for a in self.state.accounts.values()
                if a["role"] == Role.PROVIDER.value]

    def _trip_for(self, trip_id: str, principal: Principal) -> dict:
        trip = self.state.trips.get(trip_id)
        if trip is None:
            raise ApiError(404, "NotFound", f"no trip {trip_id}")
        if principal.role is Role.CUSTOMER and trip["customerId"] != principal.account_id:
            raise ApiError(404, "NotFound", f"no trip {trip_id}")
        return trip

    def _active_trips(self, field: str, owner: str):
        return [self._typed_trip(t) for t in self.state.trips.values()
                if t[field] == owner and t["state"] in ("Scheduled", "InTransit")]

    @staticmethod
    def _trip_item(trip: dict) -> dict:
        return {"tripId": trip["tripId"], "requestId": trip["requestId"],
                "customerId": trip["customerId"], "vehicleId": trip["vehicleId"],
                "driverId": trip["driverId"], "state": trip["state"],
                "pickup": dict(trip["pickup"]), "dropoff": dict(trip["dropoff"]),
                "plannedKm": trip["plannedKm"], "quotedCost": trip["quotedCost"],
                "scheduledStartMs": trip["scheduledStartMs"]}

    # ---- public and account commands --------------------------------------

    def login(self, body: dict) -> dict:
        login = _field_str(body, "login", 64)
        password = _field_str(body, "password", 128)
        with self._lock:
            account_id = self.state.logins.get(login)
            if account_id is None:
                burn_verification()
                raise ApiError(401, "AuthFailure", "unknown login or wrong password")
            account = self.state.accounts[account_id]
            if not verify_password(password, account["salt"], account["hash"]):
                raise ApiError(401, "AuthFailure", "unknown login or wrong password")
            session = self.sessions.issue(account_id)
            return {"token": session.token, "accountId": account_id,
                    "role": account["role"], "expiresAt": session.expires_at}

    def _register(self, body: dict, kind: str, prefix: str, now_ms=None) -> dict:
        login, password, name = _credentials(body)
        now = self.now_ms() if now_ms is None else now_ms
        with self._lock:
            if login in self.state.logins:
                raise ApiError(409, "AlreadyExists", f"login {login!r} is taken")
            account_id = self.state.make_id(prefix)
            salt = new_salt()
            payload = {"accountId": account_id, "login": login, "name": name,
                       "salt": salt.hex(),
                       "hash": hash_password(password, salt).hex(), "ts": now}
            self._append([(kind, payload)], now)
            return payload

    def register_customer(self, body: dict, now_ms=None) -> dict:
        payload = self._register(body, "account.customer_registered", "c", now_ms)
        return {"customerId": payload["accountId"], "login": payload["login"]}

    def register_provider(self, body: dict, now_ms=None) -> dict:
        payload = self._register(body, "account.provider_registered", "p", now_ms)
        return {"providerId": payload["accountId"], "login": payload["login"],
                "status": "Pending"}

    # ---- admin ------------------------------------------------------------

    def approve_provider(self, provider_id: str, now_ms=None) -> dict:
        now = self.now_ms() if now_ms is None else now_ms
        with self._lock:
            account = self.state.accounts.get(provider_id)
            if account is None or account["role"] != Role.PROVIDER.value:
                raise ApiError(404, "NotFound", f"no provider {provider_id}")
            if account["status"] != "Approved":
                self._append([("provider.approved",
                               {"providerId": provider_id, "ts": now})], now)
            return {"providerId": provider_id, "status": "Approved"}

    def list_providers(self) -> dict:
        with self._lock:
            items = [{"providerId": a["accountId"], "login": a["login"],
                      "name": a["name"], "status": a["status"],
                      "createdMs": a["createdMs"]}
                     for a in self.state.accounts.values()
                     if a["role"] == Role.PROVIDER.value]
        return {"items": sorted(items, key=lambda i: i["providerId"])}

    def list_customers(self) -> dict:
        with self._lock:
            items = [{"customerId": a["accountId"], "login": a["login"],
                      "name": a["name"], "createdMs": a["createdMs"]}
                     for a in self.state.accounts.values()
                     if a["role"] == Role.CUSTOMER.value]
        return {"items": sorted(items, key=lambda i: i["customerId"])}

    def list_all_vehicles(self) -> dict:
        with self._lock:
            items = [dict(v) for v in self.state.vehicles.values()]
        return {"items": sorted(items, key=lambda i: i["vehicleId"])}

    def spam_report(self) -> dict:
        with self._lock:
            flagged = detect_spam_providers(self._review_objs())
        return {"items": [{"providerId": pid, "reasons": list(reasons)}
                          for pid, reasons in flagged.items()]}

    def provider_rankings(self) -> dict:
        with self._lock:
            stars = provider_star_lists(self._review_objs(), self._provider_ids())
            ranked = rank_providers(stars)
            names = {a["accountId"]: a["name"] for a in self.state.accounts.values()}
        return {"items": [{"providerId": r.provider_id,
                           "name": names.get(r.provider_id),
                           "meanStars": r.mean_stars,
                           "reviewCount": r.review_count} for r in ranked]}

    def sentiment_report(self) -> dict:
        with self._lock:
            positive, negative, neutral = sentiment_counts(self._review_objs())
        return {"positive": positive, "negative": negative, "neutral": neutral}

    # ---- provider ---------------------------------------------------------

    def add_vehicle(self, principal: Principal, body: dict, now_ms=None) -> dict:
        vtype = _field_str(body, "type", 32)
        cost = _money_param(body.get("costPerKm"), "costPerKm")
        point = _field_point(body, "location")
        now = self.now_ms() if now_ms is None else now_ms
        with self._lock:
            vehicle_id = self.state.make_id("v")
            payload = {"vehicleId": vehicle_id, "providerId": principal.account_id,
                       "type": vtype, "costPerKm": _dec_str(cost),
                       "lat": point.lat, "lon": point.lon, "ts": now}
            self._append([("vehicle.added", payload)], now)
            return dict(self.state.vehicles[vehicle_id])

    def add_driver(self, principal: Principal, body: dict, now_ms=None) -> dict:
        login, password, name = _credentials(body)
        now = self.now_ms() if now_ms is None else now_ms
        with self._lock:
            if login in self.state.logins:
                raise ApiError(409, "AlreadyExists", f"login {login!r} is taken")
            driver_id = self.state.make_id("d")
            salt = new_salt()
            payload = {"accountId": driver_id, "login": login, "name": name,
                       "providerId": principal.account_id, "salt": salt.hex(),
                       "hash": hash_password(password, salt).hex(), "ts": now}
            self._append([("account.driver_registered", payload)], now)
            return {"driverId": driver_id, "login": login, "name": name}

    def provider_requests(self, principal: Principal) -> dict:
        with self._lock:
            items = [self._trip_item(t) for t in self.state.trips.values()
                     if t["providerId"] == principal.account_id
                     and t["state"] in ("Scheduled", "InTransit")]
        return {"items": sorted(items, key=lambda i: i["tripId"])}

    def send_notification(self, principal: Principal, body: dict, now_ms=None) -> dict:
        driver_id = _field_str(body, "driverId", 64)
        message = _field_str(body, "message", 500)
        trip_id = body.get("tripId")
        if trip_id is not None and not isinstance(trip_id, str):
            raise ApiError(422, "InvalidParam", "tripId must be a string")
        now = self.now_ms() if now_ms is None else now_ms
        with self._lock:
            driver = self.state.drivers.get(driver_id)
            if driver is None:
                raise ApiError(404, "UnknownDriver", f"no driver {driver_id}")
            if driver["providerId"] != principal.account_id:
                raise ApiError(403, "Forbidden", "driver belongs to another provider")
            if trip_id is not None:
                trip = self.state.trips.get(trip_id)
                if trip is None:
                    raise ApiError(404, "NotFound", f"no trip {trip_id}")
                if trip["providerId"] != principal.account_id:
                    raise ApiError(403, "Forbidden", "trip belongs to another provider")
            notification_id = self.state.make_id("n")
            payload = {"notificationId": notification_id,
                       "providerId": principal.account_id, "driverId": driver_id,
                       "message": message, "ts": now}
            if trip_id is not None:
                payload["tripId"] = trip_id
            self._append([("notification.sent", payload)], now)
            return {"notificationId": notification_id}

    def _schedule_payload(self, owner: str, trips) -> dict:
        try:
            schedule = build_schedule(owner, trips)
        except OverlapError as err:
            raise ApiError(409, "Overlap",
                           f"trips {err.trip_a} and {err.trip_b} overlap") from None
        return {"owner": owner,
                "entries": [{"tripId": e.trip_id, "startMs": e.start_ms,
                             "endMs": e.end_ms} for e in schedule.entries]}

    def vehicle_schedule(self, principal: Principal, vehicle_id: str) -> dict:
        with self._lock:
            vehicle = self.state.vehicles.get(vehicle_id)
            if vehicle is None:
                raise ApiError(404, "NotFound", f"no vehicle {vehicle_id}")
            if vehicle["providerId"] != principal.account_id:
                raise ApiError(403, "Forbidden", "vehicle belongs to another provider")
            return self._schedule_payload(vehicle_id,
                                          self._active_trips("vehicleId", vehicle_id))

    def provider_history(self, principal: Principal) -> dict:
        with self._lock:
            items = []
            for trip in self.state.trips.values():
                if trip["providerId"] != principal.account_id or trip["state"] != "Completed":
                    continue
                item = self._trip_item(trip)
                item.update({"actualKm": trip["actualKm"],
                             "finalCost": trip["finalCost"],
                             "fuelUnits": trip["fuelUnits"],
                             "completedMs": trip["completedMs"],
                             "paid": trip["tripId"] in self.state.payment_by_trip})
                items.append(item)
        return {"items": sorted(items, key=lambda i: (i["completedMs"], i["tripId"]))}

    def provider_profile(self, principal: Principal) -> dict:
        account = principal.account
        return {"providerId": account["accountId"], "login": account["login"],
                "name": account["name"], "status": account["status"]}

    def set_vehicle_status(self, principal: Principal, vehicle_id: str,
                           body: dict, now_ms=None) -> dict:
        flag = body.get("outOfService")
        if not isinstance(flag, bool):
            raise ApiError(422, "InvalidParam", "outOfService must be a boolean")
        now = self.now_ms() if now_ms is None else now_ms
        with self._lock:
            record = self.state.vehicles.get(vehicle_id)
            if record is None:
                raise ApiError(404, "NotFound", f"no vehicle {vehicle_id}")
            if record["providerId"] != principal.account_id:
                raise ApiError(403, "Forbidden", "vehicle belongs to another provider")
            try:
                updated = set_maintenance(self._typed_vehicle(record), flag)
            except InvalidState as err:
                raise ApiError(409, "InvalidState", str(err)) from None
            if updated.status.value != record["status"]:
                self._append([("vehicle.status_set",
                               {"vehicleId": vehicle_id,
                                "status": updated.status.value, "ts": now})], now)
            return {"vehicleId": vehicle_id, "status": updated.status.value}

    # ---- customer ---------------------------------------------------------

    def search_vehicles(self, params) -> dict:
        vtype = params.get("type") or None
        max_cost = None
        if params.get("maxCost") is not None:
            max_cost = _money_param(params.get("maxCost"), "maxCost")
        origin = _latlon_param(params, required=False)
        with self._lock:
            pairs, _, _ = self._fleet_snapshot()
            items = []
            for record, position in pairs:
                if record["status"] != "Available":
                    continue
                if vtype is not None and record["type"] != vtype:
                    continue
                if max_cost is not None and Decimal(record["costPerKm"]) > max_cost:
                    continue
                item = {"vehicleId": record["vehicleId"],
                        "providerId": record["providerId"],
                        "type": record["type"], "costPerKm": record["costPerKm"],
                        "lat": position.lat, "lon": position.lon}
                if origin is not None:
                    item["distanceKm"] = haversine_km(origin, position)
                items.append(item)
        if origin is not None:
            items.sort(key=lambda i: (i["distanceKm"], i["vehicleId"]))
        else:
            items.sort(key=lambda i: i["vehicleId"])
        return {"items": items}

    def submit_request(self, principal: Principal, body: dict, now_ms=None) -> dict:
        pickup = _field_point(body, "pickup")
        dropoff = _field_point(body, "dropoff")
        vtype = _field_str(body, "vehicleType", 32)
        now = self.now_ms() if now_ms is None else now_ms
        requested = body.get("requestedTimeMs")
        if requested is None:
            requested = now
        elif not isinstance(requested, int) or isinstance(requested, bool) or requested < 0:
            raise ApiError(422, "InvalidParam", "requestedTimeMs must be a non-negative integer")
        radius = body.get("maxRadiusKm", 50.0)
        if not isinstance(radius, (int, float)) or isinstance(radius, bool) or not radius > 0:
            raise ApiError(422, "InvalidParam", "maxRadiusKm must be positive")
        with self._lock:
            request_id = self.state.make_id("r")
            try:
                request = TripRequest(request_id, principal.account_id, pickup,
                                      dropoff, vtype, requested, float(radius))
            except InvalidParam as err:
                raise ApiError(422, "InvalidParam", str(err)) from None
            vehicles = [self._typed_vehicle(v) for v in self.state.vehicles.values()]
            drivers = [self._typed_driver(d) for d in self.state.drivers.values()]
            outcome = allocate(request, vehicles, drivers, self._positions())
            submitted = ("request.submitted", {
                "requestId": request_id, "customerId": principal.account_id,
                "pickup": {"lat": pickup.lat, "lon": pickup.lon},
                "dropoff": {"lat": dropoff.lat, "lon": dropoff.lon},
                "vehicleType": vtype, "requestedTime": requested,
                "maxRadiusKm": float(radius), "ts": now,
            })
            if not outcome.accepted:
                self._append([submitted,
                              ("request.rejected",
                               {"requestId": request_id, "reason": outcome.reason,
                                "ts": now})], now)
                raise ApiError(409, outcome.reason,
                               f"request cannot be served: {outcome.reason}")
            vehicle = self.state.vehicles[outcome.vehicle_id]
            trip_id = self.state.make_id("t")
            trip = plan_trip(trip_id, request, self._typed_vehicle(vehicle),
                             self._typed_driver(self.state.drivers[outcome.driver_id]),
                             Polyline([pickup, dropoff]))
            self._append([
                submitted,
                ("request.allocated", {"requestId": request_id,
                                       "vehicleId": outcome.vehicle_id,
                                       "driverId": outcome.driver_id, "ts": now}),
                ("trip.planned", {
                    "tripId": trip_id, "requestId": request_id,
                    "customerId": principal.account_id,
                    "providerId": vehicle["providerId"],
                    "vehicleId": outcome.vehicle_id, "driverId": outcome.driver_id,
                    "pickup": {"lat": pickup.lat, "lon": pickup.lon},
                    "dropoff": {"lat": dropoff.lat, "lon": dropoff.lon},
                    "plannedKm": _dec_str(trip.planned_dr_km),
                    "quotedCost": _dec_str(trip.quoted_cost),
                    "scheduledStartMs": requested, "ts": now,
                }),
            ], now)
            return self._trip_item(self.state.trips[trip_id])

    def recommendations(self, principal: Principal, params) -> dict:
        origin = _latlon_param(params, required=True)
        vtype = params.get("type") or None
        max_cost = None
        if params.get("maxCost") is not None:
            max_cost = float(_money_param(params.get("maxCost"), "maxCost"))
        with self._lock:
            matrix = RatingMatrix((r["customerId"], r["vehicleId"], r["stars"])
                                  for r in self.state.reviews)
            _, fleet, meta = self._fleet_snapshot()
            query = RecommendationQuery(principal.account_id, origin,
                                        max_cost_per_km=max_cost, vehicle_type=vtype)
            try:
                ranked = recommend(matrix, query, fleet)
            except EmptyFleet:
                ranked = []
            items = [{"vehicleId": r.vehicle_id,
                      "providerId": meta[r.vehicle_id]["providerId"],
                      "type": meta[r.vehicle_id]["type"],
                      "costPerKm": meta[r.vehicle_id]["costPerKm"],
                      "score": r.score, "predictedRating": r.predicted_rating,
                      "distanceKm": r.distance_km} for r in ranked]
        return {"items": items}

    def trip_detail(self, principal: Principal, trip_id: str) -> dict:
        with self._lock:
            return dict(self._trip_for(trip_id, principal))

    def trip_position(self, principal: Principal, trip_id: str) -> dict:
        with self._lock:
            trip = self._trip_for(trip_id, principal)
            fix = self.state.tracks.current_position(trip["vehicleId"])
            position = None
            if fix is not None:
                position = {"lat": fix.point.lat, "lon": fix.point.lon,
                            "ts": fix.timestamp}
            return {"tripId": trip_id, "vehicleId": trip["vehicleId"],
                    "state": trip["state"], "position": position}

    def record_payment(self, principal: Principal, trip_id: str, now_ms=None) -> dict:
        now = self.now_ms() if now_ms is None else now_ms
        with self._lock:
            trip = self._trip_for(trip_id, principal)
            if trip["state"] != "Completed":
                raise ApiError(409, "NotCompleted", f"trip {trip_id} is {trip['state']}")
            if trip_id in self.state.payment_by_trip:
                raise ApiError(409, "AlreadyPaid", f"trip {trip_id} is already paid")
            payment_id = self.state.make_id("pay")
            payload = {"paymentId": payment_id, "tripId": trip_id,
                       "customerId": trip["customerId"],
                       "providerId": trip["providerId"],
                       "amount": trip["finalCost"], "ts": now}
            self._append([("payment.recorded", payload)], now)
            return dict(self.state.payments[payment_id])

    def submit_review(self, principal: Principal, body: dict, now_ms=None) -> dict:
        trip_id = _field_str(body, "tripId", 64)
        text = body.get("text")
        if not isinstance(text, str):
            raise ApiError(422, "InvalidParam", "text must be a string")
        stars = body.get("stars")
        now = self.now_ms() if now_ms is None else now_ms
        with self._lock:
            trip = self._trip_for(trip_id, principal)
            if trip_id not in self.state.payment_by_trip:
                raise ApiError(409, "NotPaid", f"trip {trip_id} has no recorded payment")
            if trip_id in self.state.review_trips:
                raise ApiError(409, "AlreadyReviewed", f"trip {trip_id} is already reviewed")
            review_id = self.state.make_id("rev")
            try:
                review = Review(review_id, trip["customerId"], trip["providerId"],
                                trip_id, text, stars, now)
            except InvalidParam as err:
                raise ApiError(422, "InvalidParam", str(err)) from None
            self._append([("review.submitted", {
                "reviewId": review_id, "tripId": trip_id,
                "customerId": trip["customerId"], "providerId": trip["providerId"],
                "vehicleId": trip["vehicleId"], "stars": review.stars,
                "text": review.text, "ts": now,
            })], now)
            return {"reviewId": review_id,
                    "sentiment": classify_review(review.text).value}

    def trip_summary(self, trip: dict) -> dict:
        return {"tripId": trip["tripId"], "customerId": trip["customerId"],
                "providerId": trip["providerId"], "vehicleId": trip["vehicleId"],
                "pickup": dict(trip["pickup"]), "dropoff": dict(trip["dropoff"]),
                "cost": trip["finalCost"]}

    def trip_qr(self, principal: Principal, trip_id: str):
        with self._lock:
            trip = self._trip_for(trip_id, principal)
            if trip["state"] != "Completed":
                raise ApiError(409, "NotCompleted",
                               f"trip {trip_id} is {trip['state']}")
            payload = json.dumps(self.trip_summary(trip), sort_keys=True,
                                 separators=(",", ":")).encode()
        try:
            # Level L buys the capacity headroom long coordinate reprs need.
            matrix = make_trip_qr(payload, self.qr_passphrase, ec=EcLevel.L)
        except CapacityError as err:
            raise ApiError(500, "InternalError", str(err)) from None
        return write_pbm(matrix), matrix.version

    # ---- driver -----------------------------------------------------------

    def driver_requests(self, principal: Principal) -> dict:
        with self._lock:
            items = [self._trip_item(t) for t in self.state.trips.values()
                     if t["driverId"] == principal.account_id
                     and t["state"] == "Scheduled"]
        return {"items": sorted(items, key=lambda i: i["tripId"])}

    def driver_accept(self, principal: Principal, request_id: str, now_ms=None) -> dict:
        now = self.now_ms() if now_ms is None else now_ms
        with self._lock:
            request = self.state.requests.get(request_id)
            if request is None:
                raise ApiError(404, "NotFound", f"no request {request_id}")
            trip_id = self.state.trip_by_request.get(request_id)
            if trip_id is None:
                raise ApiError(409, "InvalidState",
                               f"request {request_id} has no trip to accept")
            trip = self.state.trips[trip_id]
            if trip["driverId"] != principal.account_id:
                raise ApiError(403, "Forbidden", "request is assigned to another driver")
            try:
                transition(self._typed_trip(trip), TripEvent.START,
                           self._typed_vehicle(self.state.vehicles[trip["vehicleId"]]),
                           self._typed_driver(self.state.drivers[trip["driverId"]]))
            except IllegalTransition as err:
                raise ApiError(409, "IllegalTransition", str(err)) from None
            self._append([("trip.started", {"tripId": trip_id, "ts": now})], now)
            return {"tripId": trip_id, "requestId": request_id,
                    "state": "InTransit", "startedMs": now}

    def driver_complete(self, principal: Principal, trip_id: str, now_ms=None) -> dict:
        now = self.now_ms() if now_ms is None else now_ms
        with self._lock:
            trip = self.state.trips.get(trip_id)
            if trip is None:
                raise ApiError(404, "NotFound", f"no trip {trip_id}")
            if trip["driverId"] != principal.account_id:
                raise ApiError(403, "Forbidden", "trip is assigned to another driver")
            started = trip["startedMs"]
            track = [p for p in self.state.tracks.track(trip["vehicleId"])
                     if started is not None and p.timestamp > started]
            try:
                done, _, _ = transition(
                    self._typed_trip(trip), TripEvent.COMPLETE,
                    self._typed_vehicle(self.state.vehicles[trip["vehicleId"]]),
                    self._typed_driver(self.state.drivers[trip["driverId"]]),
                    track=track)
            except IllegalTransition as err:
                raise ApiError(409, "IllegalTransition", str(err)) from None
            self._append([("trip.completed", {
                "tripId": trip_id, "actualKm": _dec_str(done.actual_dr_km),
                "finalCost": _dec_str(done.final_cost),
                "fuelUnits": _dec_str(done.fuel_units), "ts": now,
            })], now)
            return {"tripId": trip_id, "state": "Completed",
                    "actualKm": _dec_str(done.actual_dr_km),
                    "finalCost": _dec_str(done.final_cost),
                    "fuelUnits": _dec_str(done.fuel_units)}

    def driver_schedule(self, principal: Principal) -> dict:
        with self._lock:
            return self._schedule_payload(
                principal.account_id,
                self._active_trips("driverId", principal.account_id))

    def driver_notifications(self, principal: Principal) -> dict:
        with self._lock:
            inbox = [dict(n) for n in
                     self.state.notifications.get(principal.account_id, ())]
        return {"items": inbox}

    # ---- telemetry --------------------------------------------------------

    def post_telemetry(self, body: dict) -> dict:
        try:
            msg = from_wire(body)
        except InvalidParam as err:
            raise ApiError(422, "InvalidParam", str(err)) from None
        with self._lock:
            if msg.vehicle_id not in self.state.vehicles:
                raise ApiError(404, "NotFound", f"no vehicle {msg.vehicle_id}")
            last_seq, last_ts = self.state.tracks.last_marks(msg.vehicle_id)
            if msg.seq <= last_seq or msg.timestamp <= last_ts:
                return {"result": "RejectedStale"}
            self._append([("telemetry.accepted",
                           {"vehicleId": msg.vehicle_id, "lat": msg.point.lat,
                            "lon": msg.point.lon, "ts": msg.timestamp,
                            "seq": msg.seq})], self.now_ms())
            return {"result": "Accepted"}

    def vehicle_track(self, principal: Principal, vehicle_id: str) -> dict:
        with self._lock:
            vehicle = self.state.vehicles.get(vehicle_id)
            if vehicle is None:
                raise ApiError(404, "NotFound", f"no vehicle {vehicle_id}")
            if (principal.role is Role.PROVIDER
                    and vehicle["providerId"] != principal.account_id):
                raise ApiError(403, "Forbidden", "vehicle belongs to another provider")
            points = [{"lat": p.point.lat, "lon": p.point.lon, "ts": p.timestamp}
                      for p in self.state.tracks.track(vehicle_id)]
        return {"vehicleId": vehicle_id, "points": points}

    # ---- seeding ----------------------------------------------------------

    def is_seeded(self, name: str) -> bool:
        with self._lock:
            return name in self.state.seeded

    def mark_seeded(self, name: str, now_ms=None) -> None:
        now = self.now_ms() if now_ms is None else now_ms
        with self._lock:
            self._append([("scenario.seeded", {"name": name, "ts": now})], now)


# ---- route table -----------------------------------------------------------

@dataclass(frozen=True)
class RouteRule:
    roles: frozenset
    pending_ok: bool = False


_EVERYONE = frozenset(Role)
_ADMIN = frozenset({Role.ADMIN})
_PROVIDER = frozenset({Role.PROVIDER})
_CUSTOMER = frozenset({Role.CUSTOMER})
_DRIVER = frozenset({Role.DRIVER})

ROUTES = {
    ("POST", "/api/auth/login"): RouteRule(_EVERYONE, pending_ok=True),
    ("POST", "/api/providers/register"): RouteRule(_EVERYONE, pending_ok=True),
    ("POST", "/api/customers/register"): RouteRule(_EVERYONE, pending_ok=True),
    ("POST", "/api/telemetry"): RouteRule(_EVERYONE, pending_ok=True),
    ("POST", "/api/admin/providers/{provider_id}/approve"): RouteRule(_ADMIN),
    ("GET", "/api/admin/providers"): RouteRule(_ADMIN),
    ("GET", "/api/admin/customers"): RouteRule(_ADMIN),
    ("GET", "/api/admin/vehicles"): RouteRule(_ADMIN),
    ("GET", "/api/admin/spam"): RouteRule(_ADMIN),
    ("GET", "/api/admin/rankings"): RouteRule(_ADMIN),
    ("GET", "/api/admin/sentiment"): RouteRule(_ADMIN),
    ("POST", "/api/vehicles"): RouteRule(_PROVIDER),
    ("POST", "/api/vehicles/{vehicle_id}/status"): RouteRule(_PROVIDER),
    ("POST", "/api/drivers"): RouteRule(_PROVIDER),
    ("GET", "/api/requests"): RouteRule(_PROVIDER),
    ("POST", "/api/notifications"): RouteRule(_PROVIDER),
    ("GET", "/api/schedule/{vehicle_id}"): RouteRule(_PROVIDER),
    ("GET", "/api/history"): RouteRule(_PROVIDER),
    ("GET", "/api/providers/me"): RouteRule(_PROVIDER, pending_ok=True),
    ("GET", "/api/vehicles"): RouteRule(_CUSTOMER),
    ("POST", "/api/requests"): RouteRule(_CUSTOMER),
    ("GET", "/api/recommendations"): RouteRule(_CUSTOMER),
    ("GET", "/api/trips/{trip_id}"): RouteRule(_CUSTOMER | _ADMIN),
    ("GET", "/api/trips/{trip_id}/position"): RouteRule(_CUSTOMER | _ADMIN),
    ("POST", "/api/trips/{trip_id}/payment"): RouteRule(_CUSTOMER),
    ("POST", "/api/reviews"): RouteRule(_CUSTOMER),
    ("GET", "/api/trips/{trip_id}/qr"): RouteRule(_CUSTOMER),
    ("GET", "/api/driver/requests"): RouteRule(_DRIVER),
    ("POST", "/api/driver/requests/{request_id}/accept"): RouteRule(_DRIVER),
    ("GET", "/api/driver/schedule"): RouteRule(_DRIVER),
    ("GET", "/api/driver/notifications"): RouteRule(_DRIVER),
    ("POST", "/api/driver/trips/{trip_id}/complete"): RouteRule(_DRIVER),
    ("GET", "/api/vehicles/{vehicle_id}/track"): RouteRule(_ADMIN | _PROVIDER),
}


def _bearer_token(request: Request) -> Optional[str]:
    header = request.headers.get("authorization", "")
    if header.lower().startswith("bearer "):
        return header[7:].strip() or None
    return None


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise ApiError(422, "InvalidParam", "request body must be a JSON object") from None
    return _need_dict(body, "request body")


def create_app(service: Service, console_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(docs_url=None, redoc_url=None, openapi_url=None)
    app.state.service = service

    def guard(request: Request) -> Principal:
        rule = ROUTES.get((request.method, request.scope["route"].path))
        if rule is None:
            raise RuntimeError(f"route {request.url.path} missing from ROUTES")
        session = service.sessions.resolve(_bearer_token(request))
        if session is None:
            if Role.ANONYMOUS in rule.roles:
                return ANONYMOUS
            raise ApiError(401, "Unauthenticated", "a valid bearer token is required")
        account = service.state.accounts.get(session.account_id)
        if account is None:
            raise ApiError(401, "Unauthenticated", "account no longer exists")
        role = Role(account["role"])
        if role not in rule.roles:
            raise ApiError(403, "Forbidden",
                           f"{role.value} may not call this endpoint")
        if (role is Role.PROVIDER and not rule.pending_ok
                and account.get("status") != "Approved"):
            raise ApiError(403, "Forbidden", "provider is awaiting approval")
        return Principal(session.account_id, role, account)

    @app.exception_handler(ApiError)
    async def _api_error(request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    @app.exception_handler(FleetlineError)
    async def _domain_error(request, exc: FleetlineError):
        if isinstance(exc, (InvalidLocation, OutOfRange)):
            status, code = 422, "InvalidLocation"
        elif isinstance(exc, InvalidParam):
            status, code = 422, "InvalidParam"
        elif isinstance(exc, AuthFailure):
            status, code = 401, "AuthFailure"
        elif isinstance(exc, (InvalidState, IllegalTransition, OverlapError)):
            status, code = 409, type(exc).__name__
        else:
            status, code = 500, "InternalError"
        return JSONResponse(status_code=status,
                            content={"code": code, "message": str(exc)})

    # ---- public ----
    @app.post("/api/auth/login")
    async def login(request: Request, principal: Principal = Depends(guard)):
        return service.login(await _json_body(request))

    @app.post("/api/providers/register", status_code=201)
    async def register_provider(request: Request,
                                principal: Principal = Depends(guard)):
        return service.register_provider(await _json_body(request))

    @app.post("/api/customers/register", status_code=201)
    async def register_customer(request: Request,
                                principal: Principal = Depends(guard)):
        return service.register_customer(await _json_body(request))

    @app.post("/api/telemetry")
    async def post_telemetry(request: Request,
                             principal: Principal = Depends(guard)):
        return service.post_telemetry(await _json_body(request))

    # ---- admin ----
    @app.post("/api/admin/providers/{provider_id}/approve")
    async def approve_provider(provider_id: str,
                               principal: Principal = Depends(guard)):
        return service.approve_provider(provider_id)

    @app.get("/api/admin/providers")
    async def admin_providers(principal: Principal = Depends(guard)):
        return service.list_providers()

    @app.get("/api/admin/customers")
    async def admin_customers(principal: Principal = Depends(guard)):
        return service.list_customers()

    @app.get("/api/admin/vehicles")
    async def admin_vehicles(principal: Principal = Depends(guard)):
        return service.list_all_vehicles()

    @app.get("/api/admin/spam")
    async def admin_spam(principal: Principal = Depends(guard)):
        return service.spam_report()

    @app.get("/api/admin/rankings")
    async def admin_rankings(principal: Principal = Depends(guard)):
        return service.provider_rankings()

    @app.get("/api/admin/sentiment")
    async def admin_sentiment(principal: Principal = Depends(guard)):
        return service.sentiment_report()

    # ---- provider ----
    @app.post("/api/vehicles", status_code=201)
    async def add_vehicle(request: Request, principal: Principal = Depends(guard)):
        return service.add_vehicle(principal, await _json_body(request))

    @app.post("/api/vehicles/{vehicle_id}/status")
    async def set_vehicle_status(vehicle_id: str, request: Request,
                                 principal: Principal = Depends(guard)):
        return service.set_vehicle_status(principal, vehicle_id,
                                          await _json_body(request))

    @app.post("/api/drivers", status_code=201)
    async def add_driver(request: Request, principal: Principal = Depends(guard)):
        return service.add_driver(principal, await _json_body(request))

    @app.get("/api/requests")
    async def provider_requests(principal: Principal = Depends(guard)):
        return service.provider_requests(principal)

    @app.post("/api/notifications", status_code=201)
    async def send_notification(request: Request,
                                principal: Principal = Depends(guard)):
        return service.send_notification(principal, await _json_body(request))

    @app.get("/api/schedule/{vehicle_id}")
    async def vehicle_schedule(vehicle_id: str,
                               principal: Principal = Depends(guard)):
        return service.vehicle_schedule(principal, vehicle_id)

    @app.get("/api/history")
    async def provider_history(principal: Principal = Depends(guard)):
        return service.provider_history(principal)

    @app.get("/api/providers/me")
    async def provider_profile(principal: Principal = Depends(guard)):
        return service.provider_profile(principal)

    # ---- customer ----
    @app.get("/api/vehicles")
    async def search_vehicles(request: Request,
                              principal: Principal = Depends(guard)):
        return service.search_vehicles(request.query_params)

    @app.post("/api/requests", status_code=201)
    async def submit_request(request: Request,
                             principal: Principal = Depends(guard)):
        return service.submit_request(principal, await _json_body(request))

    @app.get("/api/recommendations")
    async def recommendations(request: Request,
                              principal: Principal = Depends(guard)):
        return service.recommendations(principal, request.query_params)

    @app.get("/api/trips/{trip_id}")
    async def trip_detail(trip_id: str, principal: Principal = Depends(guard)):
        return service.trip_detail(principal, trip_id)

    @app.get("/api/trips/{trip_id}/position")
    async def trip_position(trip_id: str, principal: Principal = Depends(guard)):
        return service.trip_position(principal, trip_id)

    @app.post("/api/trips/{trip_id}/payment", status_code=201)
    async def record_payment(trip_id: str, principal: Principal = Depends(guard)):
        return service.record_payment(principal, trip_id)

    @app.post("/api/reviews", status_code=201)
    async def submit_review(request: Request,
                            principal: Principal = Depends(guard)):
        return service.submit_review(principal, await _json_body(request))

    @app.get("/api/trips/{trip_id}/qr")
    async def trip_qr(trip_id: str, principal: Principal = Depends(guard)):
        pbm, version = service.trip_qr(principal, trip_id)
        return Response(content=pbm, media_type="image/x-portable-bitmap",
                        headers={"X-Qr-Version": str(version)})

    # ---- driver ----
    @app.get("/api/driver/requests")
    async def driver_requests(principal: Principal = Depends(guard)):
        return service.driver_requests(principal)

    @app.post("/api/driver/requests/{request_id}/accept")
    async def driver_accept(request_id: str,
                            principal: Principal = Depends(guard)):
        return service.driver_accept(principal, request_id)

    @app.get("/api/driver/schedule")
    async def driver_schedule(principal: Principal = Depends(guard)):
        return service.driver_schedule(principal)

    @app.get("/api/driver/notifications")
    async def driver_notifications(principal: Principal = Depends(guard)):
        return service.driver_notifications(principal)

    @app.post("/api/driver/trips/{trip_id}/complete")
    async def driver_complete(trip_id: str,
                              principal: Principal = Depends(guard)):
        return service.driver_complete(principal, trip_id)

    # ---- telemetry reads ----
    @app.get("/api/vehicles/{vehicle_id}/track")
    async def vehicle_track(vehicle_id: str,
                            principal: Principal = Depends(guard)):
        return service.vehicle_track(principal, vehicle_id)

    if console_dir and os.path.isdir(console_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=console_dir, html=True),
                  name="console")

    return app


def create_app_from_env() -> FastAPI:
    data_dir = os.environ.get("FLEETLINE_DATA_DIR", "./fleetline-data")
    service = Service(
        data_dir,
        admin_password=os.environ.get("FLEETLINE_ADMIN_PASSWORD",
                                      DEFAULT_ADMIN_PASSWORD),
        qr_passphrase=os.environ.get("FLEETLINE_QR_PASSPHRASE",
                                     DEFAULT_QR_PASSPHRASE))
    return create_app(service,
                      console_dir=os.environ.get("FLEETLINE_CONSOLE_DIR"))
