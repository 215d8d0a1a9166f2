"""Acceptance gate: one test per core guarantee of the platform.

Run with -v to get a pass/fail line per guarantee.  Every test pins its
tolerance and wall-clock budget inline; oracle comparisons use the
independent implementations in oracles.py, never values copied from the
code under test.
"""

import json
import random
import statistics
import time
from decimal import Decimal

import pytest

from fleetline.cli import main
from fleetline.dispatch import (
    Driver,
    DriverStatus,
    TripRequest,
    Vehicle,
    VehicleStatus,
    allocate,
    fuel_usage,
    trip_cost,
)
from fleetline.errors import (
    CapacityError,
    ColdStart,
    EmptyFleet,
    FleetlineError,
)
from fleetline.geo import GeoPoint, Polyline, route_length_km
from fleetline.qrcodec import (
    EcLevel,
    QrMatrix,
    byte_capacity,
    qr_decode,
    qr_encode,
    _block_sizes,
    _template,
)
from fleetline.recommend import (
    CandidateVehicle,
    RatingMatrix,
    RecommendationQuery,
    predict_rating,
    recommend,
)
from fleetline.sealing import open_payload, seal_payload
from fleetline.service import Service
from fleetline.scenarios import DEFAULT_SEED_PASSWORD, search_bench, seed
from fleetline.tracking import IngestResult, TrackStore, simulate_transmitter

from oracles import (
    COLD_START,
    brute_force_allocate,
    brute_force_predict,
    brute_force_recommend,
)

KM_PER_DEG_LAT = 111.1950802335329


def _within_budget(started: float, limit: float, label: str) -> float:
    elapsed = time.perf_counter() - started
    assert elapsed < limit, f"{label} took {elapsed:.2f}s, budget {limit:.0f}s"
    return elapsed


# ---- review tally reproduction ---------------------------------------------

def test_review_tally_counts_are_exact(tmp_path, capsys):
    """Canonical seed reports 50/30/0; the doubled seed 100/60/0.  < 5 s."""
    started = time.perf_counter()
    for scenario, (pos, neg) in (("figure4", (50, 30)),
                                 ("figure4-doubled", (100, 60))):
        data_dir = str(tmp_path / scenario)
        assert main(["seed", "--data-dir", data_dir, "--scenario", scenario]) == 0
        capsys.readouterr()
        assert main(["report", "--data-dir", data_dir]) == 0
        out = capsys.readouterr().out
        # zero tolerance: the three rows must match byte for byte
        assert out == f"positive,{pos}\nnegative,{neg}\nneutral,0\n"
    _within_budget(started, 5.0, "review tally reproduction")


# ---- pricing equations -----------------------------------------------------

def test_pricing_equations_bit_exact():
    """10_000 random (Dr, C_v): C_t = Dr*C_v and F_u = C_t*Dr, bit-exact.  < 1 s."""
    rng = random.Random(0x0E9)
    started = time.perf_counter()
    for _ in range(10_000):
        km_thousandths = rng.randrange(0, 2_000_001)
        cost_hundredths = rng.randrange(1, 100_001)
        dr = Decimal(km_thousandths).scaleb(-3)
        cv = Decimal(cost_hundredths).scaleb(-2)
        ct = trip_cost(dr, cv)
        fu = fuel_usage(ct, dr)
        want_ct = Decimal(km_thousandths * cost_hundredths).scaleb(-5)
        want_fu = Decimal(km_thousandths * cost_hundredths * km_thousandths).scaleb(-8)
        # as_tuple equality pins sign, digits and exponent, not just value
        assert ct.as_tuple() == want_ct.as_tuple()
        assert fu.as_tuple() == want_fu.as_tuple()
    _within_budget(started, 1.0, "pricing equation sweep")


# ---- barcode round-trip and damage recovery --------------------------------

def _flip_codeword_bytes(matrix, byte_indexes):
    _, _, positions = _template(matrix.version)
    cells = [list(row) for row in matrix.cells]
    for bi in byte_indexes:
        for bit in range(8):
            r, c = positions[bi * 8 + bit]
            cells[r][c] = not cells[r][c]
    return QrMatrix(matrix.version, cells)


def _interleaved_owners(sizes):
    # Mirror of the codec's layout: data round-robin, then parity round-robin.
    owners = []
    for i in range(max(dc for dc, _ in sizes)):
        for block, (dc, _) in enumerate(sizes):
            if i < dc:
                owners.append(block)
    for i in range(max(nsym for _, nsym in sizes)):
        for block, (_, nsym) in enumerate(sizes):
            if i < nsym:
                owners.append(block)
    return owners


def test_qr_identity_and_corruption_recovery():
    """Round-trip all lengths 0..cap for v1-4 x 4 EC levels; recover from
    floor(nsym/2) corrupted bytes per block; over-capacity always raises.  < 60 s."""
    rng = random.Random(0x03C0)
    started = time.perf_counter()
    combos = [(v, ec) for v in (1, 2, 3, 4) for ec in EcLevel]

    for version, ec in combos:
        cap = byte_capacity(version, ec)
        for length in range(cap + 1):
            payload = rng.randbytes(length)
            assert qr_decode(qr_encode(payload, version, ec)) == payload
        # one byte past capacity must be refused loudly, never mangled
        with pytest.raises(CapacityError):
            qr_encode(rng.randbytes(cap + 1), version, ec)

    recovered = trials = 0
    for version, ec in combos:
        sizes = _block_sizes(version, ec)
        owners = _interleaved_owners(sizes)
        per_block = [[i for i, owner in enumerate(owners) if owner == b]
                     for b in range(len(sizes))]
        for _ in range(3):
            payload = rng.randbytes(byte_capacity(version, ec))
            matrix = qr_encode(payload, version, ec)
            flips = []
            for (dc, nsym), indexes in zip(sizes, per_block):
                flips.extend(rng.sample(indexes, nsym // 2))
            trials += 1
            if qr_decode(_flip_codeword_bytes(matrix, flips)) == payload:
                recovered += 1
    assert recovered == trials, f"recovered {recovered}/{trials} damaged codes"
    _within_budget(started, 60.0, "qr identity and recovery sweep")


# ---- sealed envelope security ----------------------------------------------

def test_sealed_envelopes_reject_tamper_and_wrong_passphrase():
    """500 envelopes: every 1-byte tamper and every wrong passphrase fails.  < 30 s."""
    rng = random.Random(0x5EA1)
    started = time.perf_counter()
    false_accepts = 0
    for i in range(500):
        payload = rng.randbytes(rng.randrange(0, 200))
        passphrase = f"trip-secret-{i}-{rng.randrange(1_000_000)}"
        envelope = seal_payload(payload, passphrase)
        wire = envelope.to_bytes()

        # rotate the damaged region so every field of the frame gets hit
        region = i % 6
        if region == 0:
            pos = 0                                     # version byte
        elif region == 1:
            pos = rng.randrange(1, 17)                  # salt
        elif region == 2:
            pos = rng.randrange(17, 29)                 # nonce
        elif region == 3:
            pos = rng.randrange(29, 33)                 # length field
        elif region == 4 and len(wire) > 49:
            pos = rng.randrange(33, len(wire) - 16)     # ciphertext
        else:
            pos = rng.randrange(len(wire) - 16, len(wire))  # tag
        tampered = bytearray(wire)
        tampered[pos] ^= rng.randrange(1, 256)
        try:
            open_payload(bytes(tampered), passphrase)
            false_accepts += 1
        except FleetlineError:
            pass

        try:
            open_payload(envelope, passphrase + "-wrong")
            false_accepts += 1
        except FleetlineError:
            pass
    assert false_accepts == 0
    _within_budget(started, 30.0, "sealed envelope attack sweep")


# ---- recommender vs brute force --------------------------------------------

def test_recommender_matches_brute_force():
    """100 random matrices up to 8x8: predictions to 1e-9, ranking exact.  < 10 s."""
    rng = random.Random(0xACE5)
    started = time.perf_counter()
    types = [None, "van", "truck"]
    for _ in range(100):
        n_customers = rng.randrange(1, 9)
        n_vehicles = rng.randrange(1, 9)
        density = rng.uniform(0.3, 0.9)
        entries = [(f"c{c}", f"v{v}", rng.choice(
                    [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0]))
                   for c in range(n_customers) for v in range(n_vehicles)
                   if rng.random() < density]
        matrix = RatingMatrix(entries)
        customer = rng.choice([f"c{c}" for c in range(n_customers)] + ["stranger"])
        k = rng.randrange(1, 5)

        for v in range(n_vehicles):
            want = brute_force_predict(entries, customer, f"v{v}", k)
            if want is COLD_START:
                with pytest.raises(ColdStart):
                    predict_rating(matrix, customer, f"v{v}", k)
            else:
                got = predict_rating(matrix, customer, f"v{v}", k)
                assert got == pytest.approx(want, abs=1e-9)

        fleet, rows = [], []
        for i in range(rng.randrange(1, 9)):
            lat, lon = rng.uniform(-70, 70), rng.uniform(-170, 170)
            cost = round(rng.uniform(1, 10), 2)
            available = rng.random() > 0.2
            vtype = rng.choice(types)
            fleet.append(CandidateVehicle(f"v{i}", GeoPoint(lat, lon), cost,
                                          available, vtype))
            rows.append({"id": f"v{i}", "lat": lat, "lon": lon, "cost": cost,
                         "available": available, "type": vtype})
        want_type = rng.choice(types) if rng.random() < 0.3 else None
        want_cost = round(rng.uniform(2, 9), 2) if rng.random() < 0.3 else None
        query = RecommendationQuery(customer, GeoPoint(rng.uniform(-70, 70),
                                                       rng.uniform(-170, 170)),
                                    max_cost_per_km=want_cost,
                                    vehicle_type=want_type, k_neighbors=k)
        want = brute_force_recommend(entries, customer, query.location.lat,
                                     query.location.lon, rows, k=k,
                                     vehicle_type=want_type, max_cost=want_cost)
        if want is None:
            with pytest.raises(EmptyFleet):
                recommend(matrix, query, fleet)
            continue
        got = recommend(matrix, query, fleet)
        assert [r.vehicle_id for r in got] == [w[0] for w in want]
        for rec, (_, score, pred) in zip(got, want):
            assert rec.score == pytest.approx(score, abs=1e-9)
            if pred is None:
                assert rec.predicted_rating is None
            else:
                assert rec.predicted_rating == pytest.approx(pred, abs=1e-9)
    _within_budget(started, 10.0, "recommender oracle sweep")


# ---- allocation vs exhaustive scan -----------------------------------------

def test_allocation_matches_exhaustive_scan():
    """200 random fleets of up to 20 vehicles, identical tie-breaks.  < 5 s."""
    rng = random.Random(0xA110)
    started = time.perf_counter()
    types = ["van", "truck", "bike"]
    for _ in range(200):
        providers = [f"p-{i}" for i in range(rng.randrange(1, 5))]
        vehicles = []
        for i in range(rng.randrange(0, 21)):
            lat, lon = rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)
            if vehicles and rng.random() < 0.15:
                twin = rng.choice(vehicles)
                lat, lon = twin.home_location.lat, twin.home_location.lon
            vehicles.append(Vehicle(f"v-{i:02d}", rng.choice(providers),
                                    rng.choice(types), Decimal("2.00"),
                                    GeoPoint(lat, lon),
                                    rng.choice(list(VehicleStatus))))
        drivers = [Driver(f"d-{i:02d}", rng.choice(providers), "x",
                          rng.choice(list(DriverStatus)))
                   for i in range(rng.randrange(0, 8))]
        request = TripRequest("r-1", "c-1",
                              GeoPoint(rng.uniform(-1, 1), rng.uniform(-1, 1)),
                              GeoPoint(1.0, 1.0), rng.choice(types),
                              1_700_000_000_000,
                              max_radius_km=rng.uniform(5.0, 120.0))
        got = allocate(request, vehicles, drivers)
        want = brute_force_allocate(
            request.pickup.lat, request.pickup.lon, request.max_radius_km,
            request.vehicle_type,
            [{"id": v.vehicle_id, "provider": v.provider_id,
              "type": v.vehicle_type,
              "available": v.status is VehicleStatus.AVAILABLE,
              "lat": v.home_location.lat, "lon": v.home_location.lon}
             for v in vehicles],
            [{"id": d.driver_id, "provider": d.provider_id,
              "free": d.status is DriverStatus.FREE} for d in drivers])
        if want[0] == "ok":
            assert (got.accepted, got.vehicle_id, got.driver_id) == (True,) + want[1:]
        else:
            assert (got.accepted, got.reason) == (False, want[1])
    _within_budget(started, 5.0, "allocation oracle sweep")


# ---- tracking fidelity and log replay --------------------------------------

def _gentle_path(rng, legs=10, leg_km=2.5):
    lat, lon = 12.0, 44.0
    points = [GeoPoint(lat, lon)]
    for _ in range(legs):
        lat += leg_km / KM_PER_DEG_LAT
        lon += rng.uniform(-0.0008, 0.0008)
        points.append(GeoPoint(lat, lon))
    return Polyline(points)


def test_tracking_fidelity_and_replay(tmp_path):
    """Simulated 25 km drive measures within 0.1%; replay is byte-identical.  < 10 s."""
    rng = random.Random(0x7AC4)
    started = time.perf_counter()

    path = _gentle_path(rng)
    ground_truth = path.length_km()
    assert 24.9 < ground_truth < 25.2
    messages = simulate_transmitter("v-probe", path, 50.0, 5_000)
    store = TrackStore()
    assert all(store.ingest(m) is IngestResult.ACCEPTED for m in messages)
    measured = route_length_km(store.track("v-probe"))
    assert abs(measured - ground_truth) / ground_truth < 1e-3

    data_dir = str(tmp_path / "replay")
    service = Service(data_dir)
    seed(service, [
        {"kind": "scenario", "payload": {"name": "fidelity-check"}},
        {"kind": "provider", "payload": {"login": "trackers",
                                         "name": "Track Fleet"}},
        {"kind": "vehicle", "payload": {"tag": "probe", "provider": "trackers",
                                        "type": "van", "costPerKm": "2.00",
                                        "lat": 12.0, "lon": 44.0,
                                        }},
        {"kind": "track", "payload": {
            "vehicle": "probe",
            "path": [[p.lat, p.lon] for p in path.points],
            "speedKmh": 50.0, "intervalMs": 5_000}},
    ])
    first = service.canonical_state()
    service.close()

    replayed = Service(data_dir)
    assert replayed.canonical_state() == first
    replayed.close()
    _within_budget(started, 10.0, "tracking fidelity and replay")


# ---- end-to-end demo -------------------------------------------------------

def test_demo_completes_with_expected_cost(tmp_path, capsys):
    """demo exits 0, final_cost = 50.0, recovered QR equals the served record.  < 30 s."""
    started = time.perf_counter()
    rc = main(["demo", "--data-dir", str(tmp_path / "demo"), "--seed", "7"])
    out = capsys.readouterr().out
    assert rc == 0, out
    assert "final_cost = 50.0\n" in out
    # the qr-compare step only prints ok after decoding the sealed code and
    # matching it byte for byte against the record the service serves
    assert "step qr-compare ok" in out
    assert out.rstrip().endswith("demo ok")
    _within_budget(started, 30.0, "end-to-end demo")


# ---- search latency over a large fleet -------------------------------------

def test_recommendation_latency_over_large_fleet(tmp_path):
    """Median recommend over 10_000 seeded vehicles stays under 100 ms."""
    service = Service(str(tmp_path / "bench"))
    try:
        summary = seed(service, search_bench())
        assert summary["vehicles"] >= 10_000
        customer_id = next(aid for aid, acc in service.state.accounts.items()
                           if acc["login"] == "bench-0")
        principal = service.principal_for(customer_id)
        params = {"lat": "2.5", "lon": "2.5"}
        service.recommendations(principal, params)  # warm the fleet snapshot
        samples = []
        for _ in range(21):
            t0 = time.perf_counter()
            items = service.recommendations(principal, params)["items"]
            samples.append(time.perf_counter() - t0)
            assert items
        median = statistics.median(samples)
        assert median < 0.100, f"median recommend {median * 1000:.1f} ms"
    finally:
        service.close()
