"""Vehicle suggestions from customer ratings, trip cost, and proximity.

Collaborative filtering uses straight-line rating distance between customers
over co-rated vehicles only; absent overlap is reported, never imputed.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import ColdStart, EmptyFleet, InvalidParam, NoOverlap
from .geo import GeoPoint, haversine_km

DEFAULT_NEIGHBORS = 3


class RatingMatrix:
    """Immutable customer-by-vehicle rating snapshot; the latest entry wins."""

    __slots__ = ("_by_customer", "_by_vehicle")

    def __init__(self, entries=()):
        by_customer = {}
        for customer_id, vehicle_id, rating in entries:
            rating = float(rating)
            if math.isnan(rating) or not 1.0 <= rating <= 5.0:
                raise InvalidParam(f"rating {rating} outside [1, 5]")
            by_customer.setdefault(customer_id, {})[vehicle_id] = rating
        by_vehicle = {}
        for customer_id, ratings in by_customer.items():
            for vehicle_id, rating in ratings.items():
                by_vehicle.setdefault(vehicle_id, {})[customer_id] = rating
        self._by_customer = by_customer
        self._by_vehicle = by_vehicle

    @property
    def customers(self):
        return frozenset(self._by_customer)

    @property
    def vehicles(self):
        return frozenset(self._by_vehicle)

    def ratings_of(self, customer_id) -> dict:
        return dict(self._by_customer.get(customer_id, ()))

    def raters_of(self, vehicle_id) -> dict:
        return dict(self._by_vehicle.get(vehicle_id, ()))

    def __len__(self):
        return sum(len(r) for r in self._by_customer.values())


def euclidean_distance(u, v, matrix: RatingMatrix) -> float:
    """Straight-line distance between two customers' co-rated vectors."""
    mine = matrix.ratings_of(u)
    theirs = matrix.ratings_of(v)
    if not mine:
        raise InvalidParam(f"unknown customer {u!r}")
    if not theirs:
        raise InvalidParam(f"unknown customer {v!r}")
    shared = sorted(mine.keys() & theirs.keys())
    if not shared:
        raise NoOverlap(f"{u!r} and {v!r} share no rated vehicle")
    return math.sqrt(sum((mine[w] - theirs[w]) ** 2 for w in shared))


def similarity(u, v, matrix: RatingMatrix) -> float:
    return 1.0 / (1.0 + euclidean_distance(u, v, matrix))


def predict_rating(matrix: RatingMatrix, customer_id, vehicle_id,
                   k: int = DEFAULT_NEIGHBORS) -> float:
    """Similarity-weighted mean over the k most similar raters of the vehicle.

    Falls back to the vehicle's mean rating when no rater overlaps with the
    customer; a vehicle nobody rated is a cold start.
    """
    if not isinstance(k, int) or k < 1:
        raise InvalidParam(f"k must be a positive integer, got {k}")
    raters = matrix.raters_of(vehicle_id)
    mine = matrix.ratings_of(customer_id)
    weighted = []
    for other_id in sorted(raters):
        if other_id == customer_id:
            continue
        theirs = matrix.ratings_of(other_id)
        shared = sorted(mine.keys() & theirs.keys())
        if not shared:
            continue
        dist = math.sqrt(sum((mine[w] - theirs[w]) ** 2 for w in shared))
        weighted.append((1.0 / (1.0 + dist), other_id, raters[other_id]))
    if weighted:
        weighted.sort(key=lambda t: (-t[0], t[1]))
        top = weighted[:k]
        total = sum(w for w, _, _ in top)
        predicted = sum(w * r for w, _, r in top) / total
    elif raters:
        predicted = sum(raters[c] for c in sorted(raters)) / len(raters)
    else:
        raise ColdStart(f"vehicle {vehicle_id!r} has no ratings")
    return min(5.0, max(1.0, predicted))


@dataclass(frozen=True)
class CandidateVehicle:
    vehicle_id: str
    location: GeoPoint
    cost_per_km: float
    available: bool = True
    vehicle_type: Optional[str] = None


@dataclass(frozen=True)
class RecommendationQuery:
    customer_id: str
    location: GeoPoint
    max_cost_per_km: Optional[float] = None
    vehicle_type: Optional[str] = None
    k_neighbors: int = DEFAULT_NEIGHBORS

    def __post_init__(self):
        if not isinstance(self.location, GeoPoint):
            raise InvalidParam("query location must be a GeoPoint")
        if not isinstance(self.k_neighbors, int) or self.k_neighbors < 1:
            raise InvalidParam(f"k_neighbors must be positive, got {self.k_neighbors}")
        if self.max_cost_per_km is not None and not self.max_cost_per_km > 0:
            raise InvalidParam(f"max_cost_per_km must be positive, got {self.max_cost_per_km}")


@dataclass(frozen=True)
class Recommendation:
    vehicle_id: str
    score: float
    predicted_rating: Optional[float]
    distance_km: float
    cost_per_km: float


def recommend(matrix: RatingMatrix, query: RecommendationQuery, fleet) -> list:
    """Rank candidate vehicles by rating prediction, cheapness, and nearness."""
    candidates = []
    for vehicle in fleet:
        if not vehicle.available:
            continue
        if query.vehicle_type is not None and vehicle.vehicle_type != query.vehicle_type:
            continue
        if query.max_cost_per_km is not None and vehicle.cost_per_km > query.max_cost_per_km:
            continue
        cost = vehicle.cost_per_km
        if not isinstance(cost, (int, float)) or math.isnan(cost) or cost <= 0:
            raise InvalidParam(f"vehicle {vehicle.vehicle_id!r} has non-positive cost {cost}")
        candidates.append(vehicle)
    if not candidates:
        raise EmptyFleet("no vehicle passes the requested filters")

    rows = []
    for vehicle in candidates:
        # A vehicle nobody rated can only cold-start; skip the full predictor.
        if not matrix._by_vehicle.get(vehicle.vehicle_id):
            predicted = None
        else:
            try:
                predicted = predict_rating(
                    matrix, query.customer_id, vehicle.vehicle_id, query.k_neighbors
                )
            except ColdStart:
                predicted = None
        rows.append((vehicle, predicted, haversine_km(query.location, vehicle.location)))

    costs = [vehicle.cost_per_km for vehicle, _, _ in rows]
    dists = [dist for _, _, dist in rows]
    cost_lo, cost_span = min(costs), max(costs) - min(costs)
    dist_lo, dist_span = min(dists), max(dists) - min(dists)

    scored = []
    for vehicle, predicted, dist in rows:
        r_norm = 0.5 if predicted is None else (predicted - 1.0) / 4.0
        cost_norm = (vehicle.cost_per_km - cost_lo) / cost_span if cost_span else 0.0
        dist_norm = (dist - dist_lo) / dist_span if dist_span else 0.0
        score = 0.5 * r_norm + 0.25 * (1.0 - cost_norm) + 0.25 * (1.0 - dist_norm)
        scored.append(Recommendation(vehicle.vehicle_id, score, predicted, dist,
                                     vehicle.cost_per_km))
    scored.sort(key=lambda rec: (-rec.score, rec.vehicle_id))
    return scored
