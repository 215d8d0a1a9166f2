import { ApiError } from "./api.js";
import type { PositionFix, PositionReport } from "./types.js";

export type TrackingPhase = "idle" | "awaiting" | "live" | "completed" | "unavailable";

export interface TrackerSnapshot {
  phase: TrackingPhase;
  tripState: string | null;
  fixes: PositionFix[];
  error: string | null;
}

export type PositionSource = (tripId: string) => Promise<PositionReport>;

/**
 * Polls one trip's position endpoint (default every second) and keeps a
 * monotonic fix buffer. At most one request is ever in flight: a slow
 * response makes the poller skip beats instead of stacking calls.
 */
export class TrackPoller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private inFlight = false;
  private fixes: PositionFix[] = [];
  private phase: TrackingPhase = "idle";
  private tripState: string | null = null;
  private error: string | null = null;

  constructor(
    private readonly source: PositionSource,
    private readonly tripId: string,
    private readonly onChange: (snap: TrackerSnapshot) => void,
    private readonly intervalMs = 1000,
  ) {}

  get running(): boolean {
    return this.timer !== null;
  }

  start(): void {
    if (this.timer !== null) return;
    this.phase = "awaiting";
    this.timer = setInterval(() => void this.tick(), this.intervalMs);
    void this.tick();
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  snapshot(): TrackerSnapshot {
    return {
      phase: this.phase,
      tripState: this.tripState,
      fixes: [...this.fixes],
      error: this.error,
    };
  }

  private async tick(): Promise<void> {
    if (this.inFlight) return;
    this.inFlight = true;
    try {
      const report = await this.source(this.tripId);
      this.tripState = report.state;
      const fix = report.position;
      const newest = this.fixes[this.fixes.length - 1];
      if (fix !== null && (newest === undefined || fix.ts > newest.ts)) {
        this.fixes.push(fix);
      }
      if (report.state === "Completed") {
        this.phase = "completed";
        this.stop();
      } else {
        this.phase = this.fixes.length > 0 ? "live" : "awaiting";
      }
      this.error = null;
    } catch (err) {
      if (err instanceof ApiError && (err.status === 404 || err.status === 403)) {
        // trip gone or not ours: no point polling on
        this.phase = "unavailable";
        this.error = err.message;
        this.stop();
      } else {
        this.error = err instanceof Error ? err.message : String(err);
      }
    } finally {
      this.inFlight = false;
      this.onChange(this.snapshot());
    }
  }
}
