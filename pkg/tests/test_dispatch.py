"""Pricing identities, allocation, trip lifecycle, and schedule conflicts."""

import random
from decimal import Decimal

import pytest

from fleetline.dispatch import (
    Allocation,
    Driver,
    DriverStatus,
    NO_DRIVER,
    NO_VEHICLE,
    RequestStatus,
    Schedule,
    Trip,
    TripEvent,
    TripRequest,
    TripState,
    Vehicle,
    VehicleStatus,
    allocate,
    as_km,
    as_money,
    build_schedule,
    fuel_usage,
    plan_trip,
    set_maintenance,
    transition,
    trip_cost,
    trip_duration_ms,
)
from fleetline.errors import (
    IllegalTransition,
    InvalidParam,
    InvalidState,
    OverlapError,
)
from fleetline.geo import GeoPoint, Polyline, TrackPoint

from oracles import brute_force_allocate, overlaps_half_open

KM_PER_DEG_LAT = 111.1950802335329


def make_vehicle(vid="v-1", provider="p-1", lat=0.0, lon=0.0, vtype="van",
                 cost="2.00", status=VehicleStatus.AVAILABLE):
    return Vehicle(vid, provider, vtype, Decimal(cost), GeoPoint(lat, lon), status)


def make_driver(did="d-1", provider="p-1", status=DriverStatus.FREE):
    return Driver(did, provider, "Driver " + did, status)


def make_request(rid="r-1", vtype="van", pickup=None, radius=50.0,
                 status=RequestStatus.PENDING):
    return TripRequest(rid, "c-1", pickup or GeoPoint(0.0, 0.0),
                       GeoPoint(1.0, 1.0), vtype, 1_700_000_000_000,
                       max_radius_km=radius, status=status)


def meridian_track(km, base_ts=0, step_ms=60_000):
    dlat = km / KM_PER_DEG_LAT
    return [TrackPoint(GeoPoint(0.0, 5.0), base_ts),
            TrackPoint(GeoPoint(dlat, 5.0), base_ts + step_ms)]


def make_trip(trip_id="t-1", vehicle_id="v-1", driver_id="d-1", dr="5.000",
              start=0, state=TripState.SCHEDULED):
    route = Polyline([GeoPoint(0.0, 0.0), GeoPoint(1.0, 0.0)])
    return Trip(trip_id, "r-1", "c-1", vehicle_id, driver_id, route,
                Decimal(dr), trip_cost(Decimal(dr), "2.00"), start, state)


class TestPricing:
    def test_quantizers(self):
        assert as_money("3.456") == Decimal("3.46")
        assert as_km(12.5) == Decimal("12.500")
        assert str(as_km(12.5)) == "12.500"

    def test_known_product(self):
        assert trip_cost(12.5, 4.0) == Decimal("50")
        assert fuel_usage(trip_cost(12.5, 4.0), 12.5) == Decimal("625")

    def test_product_is_not_rounded(self):
        # 1.111 * 2.22 = 2.46642; rounding either factor or the product breaks it
        assert trip_cost("1.111", "2.22") == Decimal("2.46642")

    def test_grid_identity(self):
        rng = random.Random(20210)
        for _ in range(400):
            i = rng.randrange(0, 2_000_000)
            j = rng.randrange(1, 10_000)
            dr = Decimal(i).scaleb(-3)
            cv = Decimal(j).scaleb(-2)
            ct = trip_cost(dr, cv)
            assert ct == Decimal(i * j).scaleb(-5)
            assert fuel_usage(ct, dr) == Decimal(i * j * i).scaleb(-8)

    def test_linear_in_distance(self):
        base = trip_cost("7.250", "3.10")
        assert trip_cost("14.500", "3.10") == base * 2

    def test_zero_distance(self):
        assert trip_cost(0, "5.00") == 0
        assert fuel_usage(0, 0) == 0

    def test_rejects_bad_inputs(self):
        with pytest.raises(InvalidParam):
            trip_cost(-1, "2.00")
        with pytest.raises(InvalidParam):
            trip_cost(5, "0.00")
        with pytest.raises(InvalidParam):
            trip_cost(5, "-2.00")
        with pytest.raises(InvalidParam):
            fuel_usage(-1, 5)
        with pytest.raises(InvalidParam):
            as_money("abc")
        with pytest.raises(InvalidParam):
            as_km(float("nan"))


class TestValidation:
    def test_vehicle_rejects_free_rides(self):
        with pytest.raises(InvalidParam):
            make_vehicle(cost="0.00")

    def test_request_rejects_degenerate_route(self):
        with pytest.raises(InvalidParam):
            TripRequest("r", "c", GeoPoint(1.0, 1.0), GeoPoint(1.0, 1.0),
                        "van", 0)

    def test_request_rejects_zero_radius(self):
        with pytest.raises(InvalidParam):
            make_request(radius=0.0)


class TestAllocation:
    def test_nearest_wins(self):
        vehicles = [make_vehicle("v-far", lat=0.2), make_vehicle("v-near", lat=0.1)]
        got = allocate(make_request(), vehicles, [make_driver()])
        assert got == Allocation(True, vehicle_id="v-near", driver_id="d-1")

    def test_exact_tie_breaks_on_vehicle_id(self):
        vehicles = [make_vehicle("v-b", lat=0.1), make_vehicle("v-a", lat=0.1)]
        got = allocate(make_request(), vehicles, [make_driver()])
        assert got.vehicle_id == "v-a"

    def test_driver_tie_breaks_on_driver_id(self):
        drivers = [make_driver("d-9"), make_driver("d-2")]
        got = allocate(make_request(), [make_vehicle()], drivers)
        assert got.driver_id == "d-2"

    def test_type_filter(self):
        got = allocate(make_request(vtype="truck"), [make_vehicle()], [make_driver()])
        assert got == Allocation(False, reason=NO_VEHICLE)

    def test_busy_vehicles_skipped(self):
        vehicles = [make_vehicle(status=VehicleStatus.RESERVED),
                    make_vehicle("v-2", status=VehicleStatus.OUT_OF_SERVICE)]
        got = allocate(make_request(), vehicles, [make_driver()])
        assert got.reason == NO_VEHICLE

    def test_radius_filter(self):
        far = make_vehicle(lat=1.0)  # ~111 km from the origin
        got = allocate(make_request(radius=50.0), [far], [make_driver()])
        assert got.reason == NO_VEHICLE
        got = allocate(make_request(radius=200.0), [far], [make_driver()])
        assert got.accepted

    def test_tracked_position_overrides_home(self):
        vehicles = [make_vehicle("v-1", lat=5.0), make_vehicle("v-2", lat=0.1)]
        positions = {"v-1": GeoPoint(0.01, 0.0)}
        got = allocate(make_request(), vehicles, [make_driver()], positions)
        assert got.vehicle_id == "v-1"

    def test_no_driver_does_not_fall_through(self):
        # nearest vehicle's provider has no free driver; a farther provider does
        vehicles = [make_vehicle("v-near", "p-1", lat=0.1),
                    make_vehicle("v-far", "p-2", lat=0.5)]
        drivers = [make_driver("d-1", "p-1", DriverStatus.ASSIGNED),
                   make_driver("d-2", "p-2")]
        got = allocate(make_request(), vehicles, drivers)
        assert got == Allocation(False, reason=NO_DRIVER)

    def test_non_pending_request_refused(self):
        with pytest.raises(InvalidState):
            allocate(make_request(status=RequestStatus.ALLOCATED),
                     [make_vehicle()], [make_driver()])

    def test_matches_brute_force(self):
        rng = random.Random(99_417)
        types = ["van", "truck", "bike"]
        for _ in range(120):
            n_vehicles = rng.randrange(0, 21)
            n_providers = rng.randrange(1, 5)
            providers = [f"p-{i}" for i in range(n_providers)]
            vehicles = []
            for i in range(n_vehicles):
                lat = rng.uniform(-1.0, 1.0)
                lon = rng.uniform(-1.0, 1.0)
                if vehicles and rng.random() < 0.15:
                    twin = rng.choice(vehicles)
                    lat, lon = twin.home_location.lat, twin.home_location.lon
                vehicles.append(Vehicle(
                    f"v-{i:02d}", rng.choice(providers), rng.choice(types),
                    Decimal("2.00"), GeoPoint(lat, lon),
                    rng.choice(list(VehicleStatus))))
            drivers = [Driver(f"d-{i:02d}", rng.choice(providers), "x",
                              rng.choice(list(DriverStatus)))
                       for i in range(rng.randrange(0, 8))]
            request = make_request(vtype=rng.choice(types),
                                   pickup=GeoPoint(rng.uniform(-1, 1), rng.uniform(-1, 1)),
                                   radius=rng.uniform(5.0, 120.0))
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


class TestLifecycle:
    def test_exactly_three_legal_transitions(self):
        legal = set()
        for state in TripState:
            for event in TripEvent:
                trip = make_trip(state=state)
                try:
                    transition(trip, event, make_vehicle(), make_driver(),
                               track=meridian_track(5.0))
                except IllegalTransition:
                    continue
                legal.add((state, event))
        assert legal == {
            (TripState.SCHEDULED, TripEvent.START),
            (TripState.IN_TRANSIT, TripEvent.COMPLETE),
            (TripState.SCHEDULED, TripEvent.CANCEL),
        }

    def test_start(self):
        vehicle = make_vehicle(status=VehicleStatus.RESERVED)
        driver = make_driver(status=DriverStatus.ASSIGNED)
        trip, vehicle, driver = transition(make_trip(), TripEvent.START,
                                           vehicle, driver)
        assert trip.state is TripState.IN_TRANSIT
        assert vehicle.status is VehicleStatus.IN_TRANSIT
        assert driver.status is DriverStatus.ASSIGNED

    def test_complete_prices_the_actual_track(self):
        vehicle = make_vehicle(status=VehicleStatus.IN_TRANSIT)
        driver = make_driver(status=DriverStatus.ASSIGNED)
        trip, vehicle, driver = transition(
            make_trip(state=TripState.IN_TRANSIT), TripEvent.COMPLETE,
            vehicle, driver, track=meridian_track(10.0))
        assert trip.state is TripState.COMPLETED
        assert trip.actual_dr_km == Decimal("10.000")
        assert trip.final_cost == Decimal("20")
        assert trip.fuel_units == Decimal("200")
        assert trip.final_cost == trip.actual_dr_km * vehicle.cost_per_km
        assert trip.fuel_units == trip.final_cost * trip.actual_dr_km
        assert vehicle.status is VehicleStatus.AVAILABLE
        assert driver.status is DriverStatus.FREE

    def test_complete_requires_track(self):
        with pytest.raises(InvalidParam):
            transition(make_trip(state=TripState.IN_TRANSIT), TripEvent.COMPLETE,
                       make_vehicle(), make_driver())

    def test_cancel_releases_resources(self):
        vehicle = make_vehicle(status=VehicleStatus.RESERVED)
        driver = make_driver(status=DriverStatus.ASSIGNED)
        trip, vehicle, driver = transition(make_trip(), TripEvent.CANCEL,
                                           vehicle, driver)
        assert trip.state is TripState.CANCELLED
        assert trip.final_cost is None
        assert vehicle.status is VehicleStatus.AVAILABLE
        assert driver.status is DriverStatus.FREE

    def test_plan_trip_quote_identity(self):
        route = Polyline([GeoPoint(0.0, 0.0), GeoPoint(0.25, 0.0),
                          GeoPoint(0.25, 0.3)])
        vehicle = make_vehicle(cost="3.70")
        trip = plan_trip("t-9", make_request(), vehicle, make_driver(), route)
        assert trip.planned_dr_km == as_km(route.length_km())
        assert trip.quoted_cost == trip.planned_dr_km * vehicle.cost_per_km
        assert trip.scheduled_start_ms == 1_700_000_000_000

    def test_maintenance_toggle(self):
        v = make_vehicle()
        down = set_maintenance(v, True)
        assert down.status is VehicleStatus.OUT_OF_SERVICE
        assert set_maintenance(down, True) is down
        assert set_maintenance(down, False).status is VehicleStatus.AVAILABLE
        with pytest.raises(InvalidState):
            set_maintenance(make_vehicle(status=VehicleStatus.IN_TRANSIT), True)


class TestSchedule:
    def test_duration(self):
        assert trip_duration_ms(12.5) == 1_125_000
        assert trip_duration_ms("0.001") == 90

    def test_disjoint_and_adjacent_ok(self):
        trips = [make_trip("t-1", dr="1.000", start=0),
                 make_trip("t-2", dr="1.000", start=90_000),  # starts as t-1 ends
                 make_trip("t-3", dr="2.000", start=500_000)]
        schedule = build_schedule("v-1", trips)
        assert isinstance(schedule, Schedule)
        assert [e.trip_id for e in schedule.entries] == ["t-1", "t-2", "t-3"]
        assert schedule.entries[0].end_ms == schedule.entries[1].start_ms

    def test_overlap_detected(self):
        trips = [make_trip("t-1", dr="1.000", start=0),
                 make_trip("t-2", dr="1.000", start=89_999)]
        with pytest.raises(OverlapError) as err:
            build_schedule("v-1", trips)
        assert (err.value.trip_a, err.value.trip_b) == ("t-1", "t-2")

    def test_overlap_with_non_adjacent_entry(self):
        # t-2 sits inside t-1; t-3 clears t-2 but not t-1
        trips = [make_trip("t-1", dr="10.000", start=0),      # [0, 900000)
                 make_trip("t-2", dr="1.000", start=100_000),  # inside t-1
                 make_trip("t-3", dr="1.000", start=300_000)]
        with pytest.raises(OverlapError) as err:
            build_schedule("v-1", [trips[0], trips[2]])
        assert (err.value.trip_a, err.value.trip_b) == ("t-1", "t-3")

    def test_owner_may_be_driver(self):
        trips = [make_trip("t-1", vehicle_id="v-9", driver_id="d-7")]
        assert build_schedule("d-7", trips).owner == "d-7"

    def test_foreign_trip_refused(self):
        with pytest.raises(InvalidParam):
            build_schedule("v-other", [make_trip()])

    def test_matches_interval_oracle(self):
        rng = random.Random(55_021)
        for _ in range(150):
            n = rng.randrange(0, 9)
            trips = []
            for i in range(n):
                dr = Decimal(rng.randrange(1, 40)).scaleb(-1)  # 0.1 .. 3.9 km
                trips.append(make_trip(f"t-{i}", dr=str(dr),
                                       start=rng.randrange(0, 1_000_000)))
            spans = [(t.scheduled_start_ms,
                      t.scheduled_start_ms + trip_duration_ms(t.planned_dr_km))
                     for t in trips]
            clash = any(overlaps_half_open(*spans[i], *spans[j])
                        for i in range(n) for j in range(i + 1, n))
            if clash:
                with pytest.raises(OverlapError):
                    build_schedule("v-1", trips)
            else:
                got = build_schedule("v-1", trips)
                assert len(got.entries) == n
                starts = [e.start_ms for e in got.entries]
                assert starts == sorted(starts)
