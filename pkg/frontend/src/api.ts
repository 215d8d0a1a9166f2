import type {
  AcceptResponse,
  CompleteResponse,
  CustomerItem,
  HistoryItem,
  LatLon,
  Listing,
  LoginResponse,
  NotificationItem,
  PositionReport,
  ProviderItem,
  RankingItem,
  RecommendationItem,
  ReviewResponse,
  Role,
  ScheduleReport,
  SentimentReport,
  SpamItem,
  TelemetryFix,
  TrackReport,
  TripDetail,
  TripItem,
  VehicleItem,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface SessionInfo {
  accountId: string;
  role: Role;
  expiresAt: number;
}

type Query = Record<string, string | number | undefined>;
type FetchLike = (url: string, init: RequestInit) => Promise<Response>;

/**
 * Typed wrapper over the service's REST surface.
 *
 * The bearer token lives in a private field and is written only into the
 * Authorization header, so no view code can ever render it into the page.
 */
export class ApiClient {
  private token: string | null = null;
  private readonly fetchFn: FetchLike;

  constructor(
    private readonly baseUrl = "",
    fetchFn?: FetchLike,
  ) {
    // bind lazily so the browser's fetch keeps its required receiver
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  get authenticated(): boolean {
    return this.token !== null;
  }

  logout(): void {
    this.token = null;
  }

  private url(path: string, query?: Query): string {
    let full = this.baseUrl + path;
    if (query) {
      const params = new URLSearchParams();
      for (const [key, value] of Object.entries(query)) {
        if (value !== undefined) params.set(key, String(value));
      }
      const encoded = params.toString();
      if (encoded) full += "?" + encoded;
    }
    return full;
  }

  private async send(method: string, path: string, body?: unknown, query?: Query): Promise<Response> {
    const headers: Record<string, string> = {};
    if (this.token !== null) headers["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const resp = await this.fetchFn(this.url(path, query), {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let code = "HttpError";
      let message = `HTTP ${resp.status}`;
      try {
        const parsed = (await resp.json()) as { code?: string; message?: string };
        if (typeof parsed.code === "string") code = parsed.code;
        if (typeof parsed.message === "string") message = parsed.message;
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(resp.status, code, message);
    }
    return resp;
  }

  private async request<T>(method: string, path: string, body?: unknown, query?: Query): Promise<T> {
    return (await this.send(method, path, body, query)).json() as Promise<T>;
  }

  // ---- accounts ----------------------------------------------------------

  async login(login: string, password: string): Promise<SessionInfo> {
    const got = await this.request<LoginResponse>("POST", "/api/auth/login", { login, password });
    this.token = got.token;
    return { accountId: got.accountId, role: got.role, expiresAt: got.expiresAt };
  }

  registerCustomer(body: { login: string; password: string; name: string }) {
    return this.request<{ customerId: string; login: string }>("POST", "/api/customers/register", body);
  }

  registerProvider(body: { login: string; password: string; name: string }) {
    return this.request<{ providerId: string; login: string; status: string }>(
      "POST", "/api/providers/register", body);
  }

  // ---- admin -------------------------------------------------------------

  approveProvider(providerId: string) {
    return this.request<{ providerId: string; status: string }>(
      "POST", `/api/admin/providers/${providerId}/approve`);
  }

  adminProviders() {
    return this.request<Listing<ProviderItem>>("GET", "/api/admin/providers");
  }

  adminCustomers() {
    return this.request<Listing<CustomerItem>>("GET", "/api/admin/customers");
  }

  adminVehicles() {
    return this.request<Listing<VehicleItem>>("GET", "/api/admin/vehicles");
  }

  adminSentiment() {
    return this.request<SentimentReport>("GET", "/api/admin/sentiment");
  }

  adminRankings() {
    return this.request<Listing<RankingItem>>("GET", "/api/admin/rankings");
  }

  adminSpam() {
    return this.request<Listing<SpamItem>>("GET", "/api/admin/spam");
  }

  // ---- provider ----------------------------------------------------------

  addVehicle(body: { type: string; costPerKm: string; location: LatLon }) {
    return this.request<VehicleItem>("POST", "/api/vehicles", body);
  }

  setVehicleStatus(vehicleId: string, outOfService: boolean) {
    return this.request<{ vehicleId: string; status: string }>(
      "POST", `/api/vehicles/${vehicleId}/status`, { outOfService });
  }

  addDriver(body: { login: string; password: string; name: string }) {
    return this.request<{ driverId: string; login: string; name: string }>(
      "POST", "/api/drivers", body);
  }

  providerRequests() {
    return this.request<Listing<TripItem>>("GET", "/api/requests");
  }

  sendNotification(body: { driverId: string; message: string; tripId?: string }) {
    return this.request<{ notificationId: string }>("POST", "/api/notifications", body);
  }

  vehicleSchedule(vehicleId: string) {
    return this.request<ScheduleReport>("GET", `/api/schedule/${vehicleId}`);
  }

  providerHistory() {
    return this.request<Listing<HistoryItem>>("GET", "/api/history");
  }

  providerProfile() {
    return this.request<{ providerId: string; login: string; name: string; status: string }>(
      "GET", "/api/providers/me");
  }

  vehicleTrack(vehicleId: string) {
    return this.request<TrackReport>("GET", `/api/vehicles/${vehicleId}/track`);
  }

  // ---- customer ----------------------------------------------------------

  searchVehicles(query: { type?: string; maxCost?: string; lat?: number; lon?: number }) {
    return this.request<Listing<VehicleItem>>("GET", "/api/vehicles", undefined, query);
  }

  recommendations(query: { lat: number; lon: number; type?: string; maxCost?: string }) {
    return this.request<Listing<RecommendationItem>>(
      "GET", "/api/recommendations", undefined, query);
  }

  submitRequest(body: {
    pickup: LatLon;
    dropoff: LatLon;
    vehicleType: string;
    requestedTimeMs?: number;
    maxRadiusKm?: number;
  }) {
    return this.request<TripItem>("POST", "/api/requests", body);
  }

  tripDetail(tripId: string) {
    return this.request<TripDetail>("GET", `/api/trips/${tripId}`);
  }

  tripPosition(tripId: string) {
    return this.request<PositionReport>("GET", `/api/trips/${tripId}/position`);
  }

  payTrip(tripId: string) {
    return this.request<{ paymentId: string; amount: string }>(
      "POST", `/api/trips/${tripId}/payment`);
  }

  submitReview(body: { tripId: string; stars: number; text: string }) {
    return this.request<ReviewResponse>("POST", "/api/reviews", body);
  }

  /** Fetch the sealed trip code as PBM text plus its symbol version. */
  async tripQr(tripId: string): Promise<{ pbm: string; version: string | null }> {
    const resp = await this.send("GET", `/api/trips/${tripId}/qr`);
    return { pbm: await resp.text(), version: resp.headers.get("X-Qr-Version") };
  }

  // ---- driver ------------------------------------------------------------

  driverRequests() {
    return this.request<Listing<TripItem>>("GET", "/api/driver/requests");
  }

  acceptRequest(requestId: string) {
    return this.request<AcceptResponse>(
      "POST", `/api/driver/requests/${requestId}/accept`);
  }

  driverSchedule() {
    return this.request<ScheduleReport>("GET", "/api/driver/schedule");
  }

  driverNotifications() {
    return this.request<Listing<NotificationItem>>("GET", "/api/driver/notifications");
  }

  completeTrip(tripId: string) {
    return this.request<CompleteResponse>(
      "POST", `/api/driver/trips/${tripId}/complete`);
  }

  // ---- telemetry (open endpoint, used by the trip watcher demo) ----------

  postTelemetry(fix: TelemetryFix) {
    return this.request<{ result: string }>("POST", "/api/telemetry", fix);
  }
}
