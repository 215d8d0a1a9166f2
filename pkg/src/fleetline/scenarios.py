"""Declarative seed scenarios: built-in generators, a line-JSON parser, and
an executor that drives service commands with deterministic timestamps.

Scenario files use the same {kind, payload} line vocabulary as the event log.
A scenario is validated in full before any mutation runs, and re-seeding a
name that is already marked in the store is a no-op.
"""

import json

from .errors import ValidationError
from .service.api import Principal, Service

BASE_MS = 1_735_689_600_000  # 2025-01-01T00:00:00Z
REVIEW_STEP_MS = 13 * 3_600_000  # keeps any customer's reviews 5+ days apart
DEFAULT_SEED_PASSWORD = "seed-pw-123456"

POSITIVE_WORDS = ("good", "great", "happy", "active", "nice", "believe")
NEGATIVE_WORDS = ("sad", "bad", "poor", "useless", "cold", "cry")

DIRECTIVE_KINDS = ("scenario", "provider", "customer", "driver", "vehicle",
                   "trip", "track")


# ---- built-in scenarios ----------------------------------------------------

def _review_fleet(name: str, positive: int, negative: int) -> list:
    lines = [
        {"kind": "scenario", "payload": {"name": name}},
        {"kind": "provider", "payload": {"login": "prime-fleet",
                                         "name": "Prime Fleet", "approve": True}},
        {"kind": "driver", "payload": {"provider": "prime-fleet",
                                       "login": "prime-driver", "name": "Pat"}},
        {"kind": "vehicle", "payload": {"provider": "prime-fleet", "tag": "shuttle",
                                        "type": "van", "costPerKm": "2.50",
                                        "lat": 0.0, "lon": 0.0}},
    ]
    for i in range(10):
        lines.append({"kind": "customer",
                      "payload": {"login": f"rider-{i:02d}",
                                  "name": f"Rider {i:02d}"}})
    total = positive + negative
    for i in range(total):
        if i < positive:
            word = POSITIVE_WORDS[i % len(POSITIVE_WORDS)]
            stars = 5 if i % 2 else 4
        else:
            word = NEGATIVE_WORDS[i % len(NEGATIVE_WORDS)]
            stars = 1 + i % 2
        lines.append({"kind": "trip", "payload": {
            "customer": f"rider-{i % 10:02d}", "vehicleType": "van",
            "pickup": {"lat": 0.0, "lon": 0.0},
            "dropoff": {"lat": 0.05, "lon": 0.0},
            "atMs": BASE_MS + i * REVIEW_STEP_MS,
            "pay": True,
            "review": {"stars": stars,
                       "text": f"trip {i} felt {word} start to finish"},
        }})
    return lines


def figure4() -> list:
    return _review_fleet("figure4", 50, 30)


def figure4_doubled() -> list:
    return _review_fleet("figure4-doubled", 100, 60)


def search_bench(fleet_size: int = 10_000) -> list:
    """A large searchable fleet plus a small rated corner for the matrix."""
    lines = [
        {"kind": "scenario", "payload": {"name": "search-bench"}},
        {"kind": "provider", "payload": {"login": "metro-fleet",
                                         "name": "Metro Fleet", "approve": True}},
        {"kind": "driver", "payload": {"provider": "metro-fleet",
                                       "login": "metro-driver", "name": "Max"}},
    ]
    for i in range(8):
        lines.append({"kind": "customer",
                      "payload": {"login": f"bench-{i}",
                                  "name": f"Bench {i}"}})
        lines.append({"kind": "vehicle", "payload": {
            "provider": "metro-fleet", "tag": f"star-{i}", "type": "sedan",
            "costPerKm": "2.00", "lat": 70.0 + i * 0.01, "lon": 10.0}})
    for i in range(fleet_size):
        lines.append({"kind": "vehicle", "payload": {
            "provider": "metro-fleet", "type": "van",
            "costPerKm": f"{1 + (i % 300) / 100:.2f}",
            "lat": (i // 100) * 0.05, "lon": (i % 100) * 0.05}})
    for k in range(40):
        j = k % 8
        lines.append({"kind": "trip", "payload": {
            "customer": f"bench-{j}", "vehicleType": "sedan",
            "pickup": {"lat": 70.0 + j * 0.01, "lon": 10.0},
            "dropoff": {"lat": 70.0 + j * 0.01, "lon": 10.05},
            "maxRadiusKm": 0.5,
            "atMs": BASE_MS + k * REVIEW_STEP_MS,
            "pay": True,
            "review": {"stars": (k * 7) % 5 + 1, "text": f"delivery {k} logged"},
        }})
    return lines


BUILTINS = {
    "figure4": figure4,
    "figure4-doubled": figure4_doubled,
    "search-bench": search_bench,
}


# ---- parsing and validation ------------------------------------------------

def _fail(line_no: int, field: str, reason: str):
    raise ValidationError(f"line {line_no}, {field}: {reason}")


def _check_str(payload: dict, field: str, line_no: int) -> str:
    value = payload.get(field)
    if not isinstance(value, str) or not value:
        _fail(line_no, field, "expected a non-empty string")
    return value


def _check_point(payload: dict, field: str, line_no: int):
    value = payload.get(field)
    if (not isinstance(value, dict)
            or not isinstance(value.get("lat"), (int, float))
            or not isinstance(value.get("lon"), (int, float))):
        _fail(line_no, field, "expected {lat, lon} numbers")


def parse_lines(lines) -> list:
    """Parse and validate directive lines; raises ValidationError."""
    directives = []
    for line_no, raw in enumerate(lines, start=1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as err:
            _fail(line_no, "json", str(err))
        if not isinstance(obj, dict) or set(obj) != {"kind", "payload"}:
            _fail(line_no, "shape", "expected {kind, payload}")
        if obj["kind"] not in DIRECTIVE_KINDS:
            _fail(line_no, "kind", f"unknown directive {obj['kind']!r}")
        if not isinstance(obj["payload"], dict):
            _fail(line_no, "payload", "expected an object")
        directives.append((line_no, obj["kind"], obj["payload"]))
    validate(directives)
    return [{"kind": kind, "payload": payload}
            for _, kind, payload in directives]


def validate(directives) -> None:
    """Reference and field checks before anything mutates."""
    logins, providers, customers, tags = set(), set(), set(), set()
    for line_no, kind, payload in directives:
        if kind == "scenario":
            _check_str(payload, "name", line_no)
            if line_no != directives[0][0]:
                _fail(line_no, "scenario", "must be the first directive")
        elif kind in ("provider", "customer", "driver"):
            login = _check_str(payload, "login", line_no)
            _check_str(payload, "name", line_no)
            if login in logins:
                _fail(line_no, "login", f"{login!r} declared twice")
            logins.add(login)
            if kind == "provider":
                providers.add(login)
            elif kind == "customer":
                customers.add(login)
            if kind == "driver" and payload.get("provider") not in providers:
                _fail(line_no, "provider", "unknown provider login")
        elif kind == "vehicle":
            if payload.get("provider") not in providers:
                _fail(line_no, "provider", "unknown provider login")
            _check_str(payload, "type", line_no)
            _check_str(payload, "costPerKm", line_no)
            for field in ("lat", "lon"):
                if not isinstance(payload.get(field), (int, float)):
                    _fail(line_no, field, "expected a number")
            tag = payload.get("tag")
            if tag is not None:
                if not isinstance(tag, str) or tag in tags:
                    _fail(line_no, "tag", "tags must be unique strings")
                tags.add(tag)
        elif kind == "trip":
            if payload.get("customer") not in customers:
                _fail(line_no, "customer", "unknown customer login")
            _check_str(payload, "vehicleType", line_no)
            _check_point(payload, "pickup", line_no)
            _check_point(payload, "dropoff", line_no)
            if not isinstance(payload.get("atMs"), int):
                _fail(line_no, "atMs", "expected an integer timestamp")
            review = payload.get("review")
            if review is not None:
                if not isinstance(review, dict):
                    _fail(line_no, "review", "expected an object")
                if review.get("stars") not in (1, 2, 3, 4, 5):
                    _fail(line_no, "review.stars", "expected 1..5")
                if not isinstance(review.get("text"), str):
                    _fail(line_no, "review.text", "expected a string")
                if not payload.get("pay", True):
                    _fail(line_no, "review", "a reviewed trip must be paid")
        elif kind == "track":
            if not isinstance(payload.get("vehicle"), str):
                _fail(line_no, "vehicle", "expected a vehicle tag or id")
            path = payload.get("path")
            if (not isinstance(path, list) or len(path) < 2
                    or not all(isinstance(p, list) and len(p) == 2 for p in path)):
                _fail(line_no, "path", "expected [[lat, lon], ...] with 2+ points")
            for field in ("speedKmh", "intervalMs"):
                if not isinstance(payload.get(field), (int, float)):
                    _fail(line_no, field, "expected a number")


def load_file(path: str) -> list:
    with open(path, encoding="utf-8") as fh:
        return parse_lines(fh)


def scenario_name(directives) -> str:
    if directives and directives[0]["kind"] == "scenario":
        return directives[0]["payload"]["name"]
    return ""


# ---- execution -------------------------------------------------------------

def seed(service: Service, directives) -> dict:
    """Run a validated scenario against a service; idempotent per name."""
    name = scenario_name(directives)
    if name and service.is_seeded(name):
        return {"scenario": name, "alreadySeeded": True}

    counts = {"providers": 0, "customers": 0, "drivers": 0,
              "vehicles": 0, "trips": 0, "reviews": 0}
    by_login = {}
    by_tag = {}
    clock = BASE_MS

    def principal(login) -> Principal:
        return service.principal_for(by_login[login])

    for directive in directives:
        kind, payload = directive["kind"], directive["payload"]
        clock += 1
        if kind == "scenario":
            continue
        if kind == "provider":
            created = service.register_provider({
                "login": payload["login"],
                "password": payload.get("password", DEFAULT_SEED_PASSWORD),
                "name": payload["name"]}, now_ms=clock)
            by_login[payload["login"]] = created["providerId"]
            if payload.get("approve", True):
                service.approve_provider(created["providerId"], now_ms=clock)
            counts["providers"] += 1
        elif kind == "customer":
            created = service.register_customer({
                "login": payload["login"],
                "password": payload.get("password", DEFAULT_SEED_PASSWORD),
                "name": payload["name"]}, now_ms=clock)
            by_login[payload["login"]] = created["customerId"]
            counts["customers"] += 1
        elif kind == "driver":
            created = service.add_driver(principal(payload["provider"]), {
                "login": payload["login"],
                "password": payload.get("password", DEFAULT_SEED_PASSWORD),
                "name": payload["name"]}, now_ms=clock)
            by_login[payload["login"]] = created["driverId"]
            counts["drivers"] += 1
        elif kind == "vehicle":
            created = service.add_vehicle(principal(payload["provider"]), {
                "type": payload["type"], "costPerKm": payload["costPerKm"],
                "location": {"lat": payload["lat"], "lon": payload["lon"]},
            }, now_ms=clock)
            if payload.get("tag"):
                by_tag[payload["tag"]] = created["vehicleId"]
            counts["vehicles"] += 1
        elif kind == "trip":
            _run_trip(service, principal(payload["customer"]), payload)
            counts["trips"] += 1
            if payload.get("review"):
                counts["reviews"] += 1
        elif kind == "track":
            vehicle_id = by_tag.get(payload["vehicle"], payload["vehicle"])
            run_track(service.post_telemetry, payload, vehicle_id)

    if name:
        service.mark_seeded(name, now_ms=clock + 1)
    return {"scenario": name, "alreadySeeded": False, **counts}


def _run_trip(service: Service, customer: Principal, payload: dict) -> None:
    at = payload["atMs"]
    body = {"pickup": payload["pickup"], "dropoff": payload["dropoff"],
            "vehicleType": payload["vehicleType"], "requestedTimeMs": at}
    if payload.get("maxRadiusKm") is not None:
        body["maxRadiusKm"] = payload["maxRadiusKm"]
    trip = service.submit_request(customer, body, now_ms=at)
    driver = service.principal_for(trip["driverId"])
    service.driver_accept(driver, trip["requestId"], now_ms=at + 60_000)
    service.driver_complete(driver, trip["tripId"], now_ms=at + 120_000)
    if payload.get("pay", True):
        service.record_payment(customer, trip["tripId"], now_ms=at + 180_000)
    review = payload.get("review")
    if review:
        service.submit_review(customer, {
            "tripId": trip["tripId"], "stars": review["stars"],
            "text": review["text"]}, now_ms=at + 240_000)


def run_track(post_fix, payload: dict, vehicle_id: str) -> dict:
    """Replay one simulated transmitter run through a telemetry sink."""
    from .geo import GeoPoint, Polyline
    from .tracking import simulate_transmitter, to_wire

    path = Polyline([GeoPoint(lat, lon) for lat, lon in payload["path"]])
    messages = simulate_transmitter(vehicle_id, path,
                                    float(payload["speedKmh"]),
                                    int(payload["intervalMs"]),
                                    start_ms=int(payload.get("startMs", 0)))
    accepted = rejected = 0
    for msg in messages:
        result = post_fix(to_wire(msg))
        if result.get("result") == "Accepted":
            accepted += 1
        else:
            rejected += 1
    return {"vehicleId": vehicle_id, "accepted": accepted, "rejected": rejected}
