import type { Role } from "./types.js";

export interface NavItem {
  id: string;
  label: string;
}

// One surface list per role. The shell renders exactly this list and the
// router refuses any view id that is not on it, which is what keeps a
// customer session from ever mounting an admin widget.
export const NAV_ITEMS: Record<Role, NavItem[]> = {
  Admin: [
    { id: "approvals", label: "Approvals" },
    { id: "sentiment", label: "Review sentiment" },
    { id: "rankings", label: "Provider rankings" },
    { id: "spam", label: "Spam flags" },
    { id: "directory", label: "Directory" },
  ],
  Provider: [
    { id: "fleet", label: "Fleet" },
    { id: "requests", label: "Requests" },
    { id: "history", label: "Trip history" },
    { id: "notify", label: "Notify drivers" },
  ],
  Customer: [
    { id: "book", label: "Book a trip" },
    { id: "trips", label: "My trips" },
    { id: "track", label: "Live tracking" },
  ],
  Driver: [
    { id: "inbox", label: "Request inbox" },
    { id: "schedule", label: "Schedule" },
    { id: "notifications", label: "Notifications" },
  ],
};

export function navFor(role: Role): NavItem[] {
  return NAV_ITEMS[role];
}

export function allowsView(role: Role, viewId: string): boolean {
  return NAV_ITEMS[role].some((item) => item.id === viewId);
}
