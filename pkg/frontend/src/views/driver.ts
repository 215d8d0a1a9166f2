import { ApiError } from "../api.js";
import type { ViewContext } from "../context.js";
import { clear, el } from "../dom.js";
import { fmtKm, fmtMoney, fmtWhen } from "../format.js";

// tripId of the last accepted request, so the Complete button knows its target
let activeTripId: string | null = null;

function errorBanner(err: unknown): HTMLElement {
  const text = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
  return el("p", { class: "error" }, [text]);
}

async function renderInbox(root: HTMLElement, ctx: ViewContext): Promise<void> {
  const listing = await ctx.api.driverRequests();
  root.append(el("h2", {}, ["Assigned requests"]));
  if (listing.items.length === 0) {
    root.append(el("p", {}, ["no open requests"]));
  }
  for (const trip of listing.items) {
    root.append(el("div", { class: "card" }, [
      el("p", {}, [
        `${trip.requestId}: ${trip.pickup.lat.toFixed(4)}, ${trip.pickup.lon.toFixed(4)} to ` +
        `${trip.dropoff.lat.toFixed(4)}, ${trip.dropoff.lon.toFixed(4)} ` +
        `(${fmtKm(trip.plannedKm)}, quoted ${fmtMoney(trip.quotedCost)})`,
      ]),
      el("button", {
        type: "button",
        onclick: () => {
          void ctx.api.acceptRequest(trip.requestId).then((accepted) => {
            activeTripId = accepted.tripId;
            ctx.rerender();
          });
        },
      }, ["Accept"]),
    ]));
  }
  if (activeTripId !== null) {
    const tripId = activeTripId;
    root.append(el("div", { class: "card" }, [
      el("p", {}, [`trip in progress: ${tripId}`]),
      el("button", {
        type: "button",
        onclick: () => {
          void ctx.api.completeTrip(tripId).then((done) => {
            activeTripId = null;
            clear(root);
            root.append(el("p", {}, [
              `trip ${done.tripId} completed: ${fmtKm(done.actualKm)}, ` +
              `cost ${fmtMoney(done.finalCost)}, fuel ${done.fuelUnits}`,
            ]));
          });
        },
      }, ["Complete trip"]),
    ]));
  }
}

async function renderSchedule(root: HTMLElement, ctx: ViewContext): Promise<void> {
  const schedule = await ctx.api.driverSchedule();
  root.append(el("h2", {}, ["Schedule"]));
  if (schedule.entries.length === 0) {
    root.append(el("p", {}, ["nothing scheduled"]));
    return;
  }
  root.append(el("ul", {}, schedule.entries.map((entry) =>
    el("li", {}, [`${entry.tripId}: ${fmtWhen(entry.startMs)} to ${fmtWhen(entry.endMs)}`]))));
}

async function renderNotifications(root: HTMLElement, ctx: ViewContext): Promise<void> {
  const listing = await ctx.api.driverNotifications();
  root.append(el("h2", {}, ["Notifications"]));
  if (listing.items.length === 0) {
    root.append(el("p", {}, ["inbox empty"]));
    return;
  }
  root.append(el("ul", {}, listing.items.map((note) => el("li", {}, [
    `${fmtWhen(note.ts)} ${note.message}${note.tripId ? ` (trip ${note.tripId})` : ""}`,
  ]))));
}

export function renderDriver(root: HTMLElement, ctx: ViewContext): void {
  clear(root);
  const handlers: Record<string, (r: HTMLElement, c: ViewContext) => Promise<void>> = {
    inbox: renderInbox,
    schedule: renderSchedule,
    notifications: renderNotifications,
  };
  const handler = handlers[ctx.state.activeView];
  if (handler === undefined) return;
  handler(root, ctx).catch((err) => root.append(errorBanner(err)));
}
