import { allowsView, navFor } from "./nav.js";
import type { PositionFix, Role } from "./types.js";

export interface Session {
  accountId: string;
  role: Role;
  login: string;
}

/**
 * Client-side view state: who is signed in, which of their surfaces is
 * active, and the live track buffer for each watched trip. Holds no
 * credentials; the token stays inside ApiClient.
 */
export class ConsoleState {
  private current: Session | null = null;
  private view = "";
  private buffers = new Map<string, PositionFix[]>();

  get session(): Session | null {
    return this.current;
  }

  get activeView(): string {
    return this.view;
  }

  openSession(session: Session): void {
    this.current = session;
    this.view = navFor(session.role)[0].id;
  }

  closeSession(): void {
    this.current = null;
    this.view = "";
    this.buffers.clear();
  }

  /** Switch surface; refused for views outside the session role's list. */
  setView(viewId: string): boolean {
    if (this.current === null || !allowsView(this.current.role, viewId)) {
      return false;
    }
    this.view = viewId;
    return true;
  }

  /** Buffer a fix for a watched trip; stale timestamps are dropped. */
  pushFix(tripId: string, fix: PositionFix): boolean {
    const buffer = this.buffers.get(tripId) ?? [];
    const newest = buffer[buffer.length - 1];
    if (newest !== undefined && fix.ts <= newest.ts) return false;
    buffer.push(fix);
    this.buffers.set(tripId, buffer);
    return true;
  }

  trackOf(tripId: string): PositionFix[] {
    return [...(this.buffers.get(tripId) ?? [])];
  }

  dropTrack(tripId: string): void {
    this.buffers.delete(tripId);
  }
}
