// Wire shapes served by the fleet API. Money, distance and fuel figures
// travel as decimal strings and are rendered verbatim; the console never
// recomputes them.

export type Role = "Admin" | "Provider" | "Customer" | "Driver";

export interface LatLon {
  lat: number;
  lon: number;
}

export interface LoginResponse {
  token: string;
  accountId: string;
  role: Role;
  expiresAt: number;
}

export interface TripItem {
  tripId: string;
  requestId: string;
  customerId: string;
  vehicleId: string;
  driverId: string;
  state: string;
  pickup: LatLon;
  dropoff: LatLon;
  plannedKm: string;
  quotedCost: string;
  scheduledStartMs: number;
}

export interface TripDetail extends TripItem {
  providerId: string;
  startedMs?: number | null;
  actualKm?: string;
  finalCost?: string;
  fuelUnits?: string;
  completedMs?: number;
}

export interface VehicleItem {
  vehicleId: string;
  providerId: string;
  type: string;
  costPerKm: string;
  lat: number;
  lon: number;
  status?: string;
  distanceKm?: number;
}

export interface RecommendationItem {
  vehicleId: string;
  providerId: string;
  type: string;
  costPerKm: string;
  score: number;
  predictedRating: number | null;
  distanceKm: number;
}

export interface SentimentReport {
  positive: number;
  negative: number;
  neutral: number;
}

export interface RankingItem {
  providerId: string;
  name: string | null;
  meanStars: number | null;
  reviewCount: number;
}

export interface SpamItem {
  providerId: string;
  reasons: string[];
}

export interface ProviderItem {
  providerId: string;
  login: string;
  name: string;
  status: string;
  createdMs: number;
}

export interface CustomerItem {
  customerId: string;
  login: string;
  name: string;
  createdMs: number;
}

export interface PositionFix {
  lat: number;
  lon: number;
  ts: number;
}

export interface PositionReport {
  tripId: string;
  vehicleId: string;
  state: string;
  position: PositionFix | null;
}

export interface TrackReport {
  vehicleId: string;
  points: PositionFix[];
}

export interface ScheduleEntry {
  tripId: string;
  startMs: number;
  endMs: number;
}

export interface ScheduleReport {
  owner: string;
  entries: ScheduleEntry[];
}

export interface NotificationItem {
  notificationId: string;
  providerId: string;
  driverId: string;
  message: string;
  ts: number;
  tripId?: string;
}

export interface HistoryItem extends TripItem {
  actualKm: string;
  finalCost: string;
  fuelUnits: string;
  completedMs: number;
  paid: boolean;
}

export interface AcceptResponse {
  tripId: string;
  requestId: string;
  state: string;
  startedMs: number;
}

export interface CompleteResponse {
  tripId: string;
  state: string;
  actualKm: string;
  finalCost: string;
  fuelUnits: string;
}

export interface ReviewResponse {
  reviewId: string;
  sentiment: string;
}

export interface TelemetryFix {
  vehicleId: string;
  lat: number;
  lon: number;
  ts: number;
  seq: number;
}

export interface Listing<T> {
  items: T[];
}
