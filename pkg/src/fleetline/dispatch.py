"""Fleet registry semantics: pricing, allocation, trip lifecycle, schedules.

Money and route lengths are fixed-point decimals (2 and 3 places) so the
pricing identities hold bit-exactly; products are never rounded.
"""

from dataclasses import dataclass, replace
from decimal import Decimal, InvalidOperation
from enum import Enum
from typing import Optional

from .errors import IllegalTransition, InvalidParam, InvalidState, OverlapError
from .geo import GeoPoint, Polyline, haversine_km, route_length_km

MONEY_STEP = Decimal("0.01")
KM_STEP = Decimal("0.001")
ASSUMED_SPEED_KMH = 40
# ms per km at the assumed speed: 3_600_000 / 40
_MS_PER_KM = Decimal(3_600_000) // ASSUMED_SPEED_KMH
DEFAULT_MAX_RADIUS_KM = 50.0

NO_VEHICLE = "NoVehicle"
NO_DRIVER = "NoDriver"


def _decimal(value, what: str) -> Decimal:
    if isinstance(value, float):
        value = str(value)
    try:
        d = Decimal(value)
    except (InvalidOperation, TypeError, ValueError):
        raise InvalidParam(f"{what} is not a number: {value!r}") from None
    if not d.is_finite():
        raise InvalidParam(f"{what} must be finite, got {value!r}")
    return d


def as_money(value) -> Decimal:
    """Currency amount quantized to 2 decimal places."""
    return _decimal(value, "amount").quantize(MONEY_STEP)


def as_km(value) -> Decimal:
    """Route length quantized to 3 decimal places."""
    return _decimal(value, "distance").quantize(KM_STEP)


def trip_cost(dr_km, cost_per_km) -> Decimal:
    """C_t: route length times per-km cost, exact."""
    dr = as_km(dr_km)
    cv = as_money(cost_per_km)
    if dr < 0:
        raise InvalidParam(f"route length must be >= 0, got {dr}")
    if cv <= 0:
        raise InvalidParam(f"cost per km must be positive, got {cv}")
    return dr * cv


def fuel_usage(cost, dr_km) -> Decimal:
    """F_u: trip cost times route length, exact, units as given."""
    ct = _decimal(cost, "trip cost")
    dr = as_km(dr_km)
    if ct < 0:
        raise InvalidParam(f"trip cost must be >= 0, got {ct}")
    if dr < 0:
        raise InvalidParam(f"route length must be >= 0, got {dr}")
    return ct * dr


class VehicleStatus(Enum):
    AVAILABLE = "Available"
    RESERVED = "Reserved"
    IN_TRANSIT = "InTransit"
    OUT_OF_SERVICE = "OutOfService"


class DriverStatus(Enum):
    FREE = "Free"
    ASSIGNED = "Assigned"


class RequestStatus(Enum):
    PENDING = "Pending"
    ALLOCATED = "Allocated"
    REJECTED = "Rejected"


class TripState(Enum):
    SCHEDULED = "Scheduled"
    IN_TRANSIT = "InTransit"
    COMPLETED = "Completed"
    CANCELLED = "Cancelled"


class TripEvent(Enum):
    START = "Start"
    COMPLETE = "Complete"
    CANCEL = "Cancel"


@dataclass(frozen=True)
class Vehicle:
    vehicle_id: str
    provider_id: str
    vehicle_type: str
    cost_per_km: Decimal
    home_location: GeoPoint
    status: VehicleStatus = VehicleStatus.AVAILABLE

    def __post_init__(self):
        cost = as_money(self.cost_per_km)
        if cost <= 0:
            raise InvalidParam(f"cost_per_km must be positive, got {cost}")
        object.__setattr__(self, "cost_per_km", cost)
        if not isinstance(self.home_location, GeoPoint):
            raise InvalidParam("home_location must be a GeoPoint")


@dataclass(frozen=True)
class Driver:
    driver_id: str
    provider_id: str
    name: str
    status: DriverStatus = DriverStatus.FREE


@dataclass(frozen=True)
class TripRequest:
    request_id: str
    customer_id: str
    pickup: GeoPoint
    dropoff: GeoPoint
    vehicle_type: str
    requested_time: int
    max_radius_km: float = DEFAULT_MAX_RADIUS_KM
    status: RequestStatus = RequestStatus.PENDING

    def __post_init__(self):
        if not isinstance(self.pickup, GeoPoint) or not isinstance(self.dropoff, GeoPoint):
            raise InvalidParam("pickup and dropoff must be GeoPoints")
        if self.pickup == self.dropoff:
            raise InvalidParam("pickup and dropoff must differ")
        if not isinstance(self.requested_time, int) or self.requested_time < 0:
            raise InvalidParam("requested_time must be a non-negative ms timestamp")
        if not self.max_radius_km > 0:
            raise InvalidParam(f"max_radius_km must be positive, got {self.max_radius_km}")


@dataclass(frozen=True)
class Trip:
    trip_id: str
    request_id: str
    customer_id: str
    vehicle_id: str
    driver_id: str
    planned_route: Polyline
    planned_dr_km: Decimal
    quoted_cost: Decimal
    scheduled_start_ms: int
    state: TripState = TripState.SCHEDULED
    actual_dr_km: Optional[Decimal] = None
    final_cost: Optional[Decimal] = None
    fuel_units: Optional[Decimal] = None


def plan_trip(trip_id: str, request: TripRequest, vehicle: Vehicle, driver: Driver,
              route: Polyline) -> Trip:
    """Quoted trip over a planned route; the quote identity holds by construction."""
    planned_dr = as_km(route.length_km())
    return Trip(
        trip_id=trip_id,
        request_id=request.request_id,
        customer_id=request.customer_id,
        vehicle_id=vehicle.vehicle_id,
        driver_id=driver.driver_id,
        planned_route=route,
        planned_dr_km=planned_dr,
        quoted_cost=trip_cost(planned_dr, vehicle.cost_per_km),
        scheduled_start_ms=request.requested_time,
    )


@dataclass(frozen=True)
class Allocation:
    accepted: bool
    vehicle_id: Optional[str] = None
    driver_id: Optional[str] = None
    reason: Optional[str] = None


def allocate(request: TripRequest, vehicles, drivers, positions=None) -> Allocation:
    """Nearest available vehicle of the requested type, plus a free driver.

    Distance is measured from the vehicle's tracked position when one is
    known, else its home location. The nearest vehicle decides the provider;
    a provider without a free driver rejects the request rather than passing
    it to the next vehicle.
    """
    if request.status is not RequestStatus.PENDING:
        raise InvalidState(f"request {request.request_id} is {request.status.value}")
    positions = positions or {}
    best = None
    for vehicle in vehicles:
        if vehicle.status is not VehicleStatus.AVAILABLE:
            continue
        if vehicle.vehicle_type != request.vehicle_type:
            continue
        where = positions.get(vehicle.vehicle_id, vehicle.home_location)
        dist = haversine_km(request.pickup, where)
        if dist > request.max_radius_km:
            continue
        key = (dist, vehicle.vehicle_id)
        if best is None or key < best[0]:
            best = (key, vehicle)
    if best is None:
        return Allocation(False, reason=NO_VEHICLE)
    chosen = best[1]
    free = [d.driver_id for d in drivers
            if d.provider_id == chosen.provider_id and d.status is DriverStatus.FREE]
    if not free:
        return Allocation(False, reason=NO_DRIVER)
    return Allocation(True, vehicle_id=chosen.vehicle_id, driver_id=min(free))


def transition(trip: Trip, event: TripEvent, vehicle: Vehicle, driver: Driver,
               track=None):
    """Apply a lifecycle event; returns the updated (trip, vehicle, driver)."""
    if trip.state is TripState.SCHEDULED and event is TripEvent.START:
        return (
            replace(trip, state=TripState.IN_TRANSIT),
            replace(vehicle, status=VehicleStatus.IN_TRANSIT),
            driver,
        )
    if trip.state is TripState.IN_TRANSIT and event is TripEvent.COMPLETE:
        if track is None:
            raise InvalidParam("completion requires the traveled track")
        actual = as_km(route_length_km(track))
        final = trip_cost(actual, vehicle.cost_per_km)
        return (
            replace(trip, state=TripState.COMPLETED, actual_dr_km=actual,
                    final_cost=final, fuel_units=fuel_usage(final, actual)),
            replace(vehicle, status=VehicleStatus.AVAILABLE),
            replace(driver, status=DriverStatus.FREE),
        )
    if trip.state is TripState.SCHEDULED and event is TripEvent.CANCEL:
        return (
            replace(trip, state=TripState.CANCELLED),
            replace(vehicle, status=VehicleStatus.AVAILABLE),
            replace(driver, status=DriverStatus.FREE),
        )
    raise IllegalTransition(f"{trip.state.value} + {event.value}")


def set_maintenance(vehicle: Vehicle, out_of_service: bool) -> Vehicle:
    """Toggle between Available and OutOfService; busy vehicles refuse."""
    target = VehicleStatus.OUT_OF_SERVICE if out_of_service else VehicleStatus.AVAILABLE
    if vehicle.status is target:
        return vehicle
    if vehicle.status not in (VehicleStatus.AVAILABLE, VehicleStatus.OUT_OF_SERVICE):
        raise InvalidState(f"vehicle {vehicle.vehicle_id} is {vehicle.status.value}")
    return replace(vehicle, status=target)


@dataclass(frozen=True)
class ScheduleEntry:
    trip_id: str
    start_ms: int
    end_ms: int


@dataclass(frozen=True)
class Schedule:
    owner: str
    entries: tuple


def trip_duration_ms(dr_km) -> int:
    """Driving time at the assumed speed, exact for 3-decimal distances."""
    return int(as_km(dr_km) * _MS_PER_KM)


def build_schedule(owner: str, trips) -> Schedule:
    """Time entries for one vehicle or driver; intervals are half-open."""
    entries = []
    for trip in trips:
        if owner not in (trip.vehicle_id, trip.driver_id):
            raise InvalidParam(f"trip {trip.trip_id} does not belong to {owner}")
        start = trip.scheduled_start_ms
        entries.append(ScheduleEntry(trip.trip_id, start,
                                     start + trip_duration_ms(trip.planned_dr_km)))
    entries.sort(key=lambda e: (e.start_ms, e.trip_id))
    running_end = None
    running_id = None
    for entry in entries:
        if running_end is not None and entry.start_ms < running_end:
            raise OverlapError(running_id, entry.trip_id)
        if running_end is None or entry.end_ms > running_end:
            running_end = entry.end_ms
            running_id = entry.trip_id
    return Schedule(owner, tuple(entries))
