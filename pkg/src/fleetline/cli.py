"""Command-line front end: serve, seed, simulate, demo, and report.

Exit codes: 0 success, 1 validation problem, 2 runtime failure.
"""

import argparse
import asyncio
import json
import os
import random
import sys

from . import scenarios
from .errors import AuthFailure, CorruptLog, FleetlineError, ValidationError
from .geo import GeoPoint, Polyline
from .qrcodec import read_pbm
from .sealing import read_trip_qr
from .service.api import (
    ApiError,
    DEFAULT_ADMIN_PASSWORD,
    DEFAULT_PORT,
    DEFAULT_QR_PASSPHRASE,
    Service,
    create_app,
)

KM_PER_DEG_LAT = 111.1950802335329
DEMO_KM = 12.5
DEMO_COST_PER_KM = "4.00"


class CliError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


class _Parser(argparse.ArgumentParser):
    # bad flags are a validation problem, not a runtime one
    def error(self, message):
        self.exit(1, f"{self.prog}: {message}\n")


def _env_admin_password() -> str:
    return os.environ.get("FLEETLINE_ADMIN_PASSWORD", DEFAULT_ADMIN_PASSWORD)


def _env_qr_passphrase() -> str:
    return os.environ.get("FLEETLINE_QR_PASSPHRASE", DEFAULT_QR_PASSPHRASE)


def _resolve_data_dir(args) -> str:
    return args.data_dir or os.environ.get("FLEETLINE_DATA_DIR", "")


def _open_service(data_dir: str) -> Service:
    if not data_dir:
        raise CliError("--data-dir is required for this command", 1)
    return Service(data_dir, admin_password=_env_admin_password(),
                   qr_passphrase=_env_qr_passphrase())


def _load_scenario(name_or_path: str):
    if name_or_path in scenarios.BUILTINS:
        return scenarios.BUILTINS[name_or_path]()
    if not os.path.exists(name_or_path):
        known = ", ".join(sorted(scenarios.BUILTINS))
        raise CliError(
            f"no scenario file {name_or_path!r} (built-ins: {known})", 1)
    return scenarios.load_file(name_or_path)


# ---- subcommands -----------------------------------------------------------

def cmd_serve(args) -> int:
    import uvicorn

    service = _open_service(_resolve_data_dir(args))
    port = int(os.environ.get("FLEETLINE_PORT", str(DEFAULT_PORT)))
    console_dir = os.environ.get("FLEETLINE_CONSOLE_DIR")
    try:
        uvicorn.run(create_app(service, console_dir=console_dir),
                    host="127.0.0.1", port=port)
    finally:
        service.close()
    return 0


def cmd_seed(args) -> int:
    directives = _load_scenario(args.scenario)
    service = _open_service(_resolve_data_dir(args))
    try:
        summary = scenarios.seed(service, directives)
    finally:
        service.close()
    if summary.get("alreadySeeded"):
        print(f"already seeded: {summary['scenario']}")
    else:
        print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_simulate(args) -> int:
    directives = _load_scenario(args.scenario)
    tracks = [d["payload"] for d in directives if d["kind"] == "track"]
    if not tracks:
        print("no track directives in scenario")
        return 0

    if args.url:
        import httpx

        with httpx.Client(base_url=args.url, timeout=10.0) as client:
            def post_fix(wire):
                resp = client.post("/api/telemetry", json=wire)
                if resp.status_code != 200:
                    raise CliError(f"telemetry rejected: {resp.text}", 2)
                return resp.json()

            for payload in tracks:
                result = scenarios.run_track(post_fix, payload,
                                             payload["vehicle"])
                print(json.dumps(result, sort_keys=True))
        return 0

    service = _open_service(_resolve_data_dir(args))
    try:
        for payload in tracks:
            result = scenarios.run_track(service.post_telemetry, payload,
                                         payload["vehicle"])
            print(json.dumps(result, sort_keys=True))
    finally:
        service.close()
    return 0


def cmd_report(args) -> int:
    if args.url:
        counts = _report_from_url(args.url)
    else:
        service = _open_service(_resolve_data_dir(args))
        try:
            counts = service.sentiment_report()
        finally:
            service.close()
    rows = (f"positive,{counts['positive']}\n"
            f"negative,{counts['negative']}\n"
            f"neutral,{counts['neutral']}\n")
    sys.stdout.write(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rows)
    return 0


def _report_from_url(url: str) -> dict:
    import httpx

    with httpx.Client(base_url=url, timeout=10.0) as client:
        login = client.post("/api/auth/login", json={
            "login": "admin", "password": _env_admin_password()})
        if login.status_code != 200:
            raise CliError(f"admin login failed: {login.text}", 2)
        resp = client.get("/api/admin/sentiment", headers={
            "Authorization": f"Bearer {login.json()['token']}"})
        if resp.status_code != 200:
            raise CliError(f"sentiment fetch failed: {resp.text}", 2)
        return resp.json()


def cmd_demo(args) -> int:
    data_dir = _resolve_data_dir(args)
    if not data_dir:
        raise CliError("--data-dir is required for this command", 1)
    if os.path.exists(os.path.join(data_dir, "events.log")):
        raise CliError(f"DataDirNotEmpty: {data_dir} already holds events", 1)
    return asyncio.run(_demo_flow(data_dir, args.seed))


async def _demo_flow(data_dir: str, seed: int) -> int:
    from httpx import ASGITransport, AsyncClient

    from .tracking import simulate_transmitter, to_wire

    rng = random.Random(seed)
    lat0 = round(rng.uniform(-55.0, 55.0), 3)
    lon0 = round(rng.uniform(-179.0, 179.0), 3)
    dropoff_lat = lat0 + DEMO_KM / KM_PER_DEG_LAT

    service = Service(data_dir, admin_password=_env_admin_password(),
                      qr_passphrase=DEFAULT_QR_PASSPHRASE)
    app = create_app(service)
    step = "setup"
    try:
        async with AsyncClient(transport=ASGITransport(app=app),
                               base_url="http://demo") as client:
            async def call(name, method, path, token=None, expect=200, **kw):
                nonlocal step
                step = name
                headers = {"Authorization": f"Bearer {token}"} if token else {}
                resp = await client.request(method, path, headers=headers, **kw)
                if resp.status_code != expect:
                    raise CliError(
                        f"demo failed at step {name}: "
                        f"HTTP {resp.status_code} {resp.text}", 2)
                return resp

            resp = await call("admin-login", "POST", "/api/auth/login", json={
                "login": "admin", "password": _env_admin_password()})
            admin = resp.json()["token"]

            resp = await call("provider-register", "POST",
                              "/api/providers/register", expect=201, json={
                                  "login": "demo-fleet",
                                  "password": "demo-pw-123",
                                  "name": "Demo Fleet"})
            provider_id = resp.json()["providerId"]
            print(f"step provider-register ok {provider_id}")

            await call("provider-approve", "POST",
                       f"/api/admin/providers/{provider_id}/approve",
                       token=admin)
            print("step provider-approve ok")

            resp = await call("provider-login", "POST", "/api/auth/login",
                              json={"login": "demo-fleet",
                                    "password": "demo-pw-123"})
            provider = resp.json()["token"]

            resp = await call("vehicle-add", "POST", "/api/vehicles",
                              token=provider, expect=201, json={
                                  "type": "van",
                                  "costPerKm": DEMO_COST_PER_KM,
                                  "location": {"lat": lat0, "lon": lon0}})
            vehicle_id = resp.json()["vehicleId"]
            print(f"step vehicle-add ok {vehicle_id} at ({lat0}, {lon0})")

            resp = await call("driver-add", "POST", "/api/drivers",
                              token=provider, expect=201, json={
                                  "login": "demo-driver",
                                  "password": "demo-pw-123",
                                  "name": "Demo Driver"})
            print(f"step driver-add ok {resp.json()['driverId']}")

            resp = await call("driver-login", "POST", "/api/auth/login",
                              json={"login": "demo-driver",
                                    "password": "demo-pw-123"})
            driver = resp.json()["token"]

            resp = await call("customer-register", "POST",
                              "/api/customers/register", expect=201, json={
                                  "login": "demo-rider",
                                  "password": "demo-pw-123",
                                  "name": "Demo Rider"})
            print(f"step customer-register ok {resp.json()['customerId']}")

            resp = await call("customer-login", "POST", "/api/auth/login",
                              json={"login": "demo-rider",
                                    "password": "demo-pw-123"})
            customer = resp.json()["token"]

            resp = await call("request-submit", "POST", "/api/requests",
                              token=customer, expect=201, json={
                                  "pickup": {"lat": lat0, "lon": lon0},
                                  "dropoff": {"lat": dropoff_lat,
                                              "lon": lon0},
                                  "vehicleType": "van"})
            trip = resp.json()
            print(f"step request-submit ok {trip['tripId']} "
                  f"planned_km = {trip['plannedKm']} "
                  f"quoted = {trip['quotedCost']}")

            resp = await call("driver-accept", "POST",
                              f"/api/driver/requests/{trip['requestId']}/accept",
                              token=driver)
            started_ms = resp.json()["startedMs"]
            print(f"step driver-accept ok {trip['tripId']}")

            step = "telemetry"
            path = Polyline([GeoPoint(lat0, lon0),
                             GeoPoint(dropoff_lat, lon0)])
            fixes = simulate_transmitter(vehicle_id, path, speed_kmh=50.0,
                                         interval_ms=60_000,
                                         start_ms=started_ms + 1)
            for msg in fixes:
                resp = await call("telemetry", "POST", "/api/telemetry",
                                  json=to_wire(msg))
                if resp.json()["result"] != "Accepted":
                    raise CliError("demo failed at step telemetry: "
                                   f"fix seq {msg.seq} rejected", 2)
            print(f"step telemetry ok {len(fixes)} fixes")

            resp = await call("trip-complete", "POST",
                              f"/api/driver/trips/{trip['tripId']}/complete",
                              token=driver)
            final_cost = float(resp.json()["finalCost"])
            print(f"step trip-complete ok actual_km = "
                  f"{resp.json()['actualKm']}")
            print(f"final_cost = {final_cost}")

            await call("payment", "POST",
                       f"/api/trips/{trip['tripId']}/payment",
                       token=customer, expect=201)
            print("step payment ok")

            resp = await call("review", "POST", "/api/reviews",
                              token=customer, expect=201, json={
                                  "tripId": trip["tripId"], "stars": 5,
                                  "text": "smooth and nice ride"})
            print(f"step review ok sentiment = {resp.json()['sentiment']}")

            resp = await call("qr-fetch", "GET",
                              f"/api/trips/{trip['tripId']}/qr",
                              token=customer)
            qr_version = resp.headers["x-qr-version"]
            print(f"step qr-fetch ok version {qr_version}")

            step = "qr-open"
            matrix = read_pbm(resp.text)
            recovered = read_trip_qr(matrix, _env_qr_passphrase())
            print("step qr-open ok")

            step = "qr-compare"
            resp = await call("qr-compare", "GET",
                              f"/api/trips/{trip['tripId']}", token=customer)
            summary = service.trip_summary(resp.json())
            expected = json.dumps(summary, sort_keys=True,
                                  separators=(",", ":")).encode()
            if recovered != expected:
                raise CliError(
                    "demo failed at step qr-compare: summary mismatch", 2)
            print("step qr-compare ok recovered summary matches served trip")
        print("demo ok")
        return 0
    except CliError:
        raise
    except FleetlineError as err:
        raise CliError(f"demo failed at step {step}: "
                       f"{type(err).__name__}: {err}", 2) from err
    finally:
        service.close()


# ---- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fleetline",
                     description="Fleet booking, tracking, and analytics.")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--data-dir", default="")

    seed = sub.add_parser("seed", help="load a scenario into a data dir")
    seed.add_argument("--data-dir", default="")
    seed.add_argument("--scenario", required=True,
                      help="built-in name or scenario file path")

    simulate = sub.add_parser("simulate",
                              help="replay scenario transmitter tracks")
    simulate.add_argument("--data-dir", default="")
    simulate.add_argument("--url", default="")
    simulate.add_argument("--scenario", required=True)

    demo = sub.add_parser("demo", help="run the scripted end-to-end flow")
    demo.add_argument("--data-dir", required=True)
    demo.add_argument("--seed", type=int, default=0)

    report = sub.add_parser("report", help="emit sentiment counts as CSV")
    report.add_argument("--data-dir", default="")
    report.add_argument("--url", default="")
    report.add_argument("--out", default="")
    return parser


_COMMANDS = {
    "serve": cmd_serve,
    "seed": cmd_seed,
    "simulate": cmd_simulate,
    "demo": cmd_demo,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except CliError as err:
        print(str(err), file=sys.stderr)
        return err.exit_code
    except (ValidationError, FileNotFoundError) as err:
        print(f"validation error: {err}", file=sys.stderr)
        return 1
    except ApiError as err:
        print(f"error: {err.code}: {err.message}", file=sys.stderr)
        return 2
    except (CorruptLog, AuthFailure, OSError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
