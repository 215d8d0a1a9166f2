import { ApiError } from "../api.js";
import type { ViewContext } from "../context.js";
import { clear, el, textInput } from "../dom.js";
import { fmtKm, fmtMoney, fmtScore, fmtStars, fmtWhen } from "../format.js";
import { drawTrack, fitTrack, panBy, zoomAt, type Ctx2D, type Viewport } from "../map.js";
import { TrackPoller, type TrackerSnapshot } from "../poll.js";
import { drawQr, parsePbm } from "../qrimage.js";
import type { PositionFix, RecommendationItem, TripItem } from "../types.js";
import { locationProblem } from "../validate.js";

// trips booked during this session, newest first
const myTrips: TripItem[] = [];
let poller: TrackPoller | null = null;

function errorBanner(err: unknown): HTMLElement {
  const text = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
  return el("p", { class: "error" }, [text]);
}

function recommendationList(items: RecommendationItem[]): HTMLElement {
  if (items.length === 0) {
    return el("p", {}, ["no recommendations for this spot yet"]);
  }
  // rendered strictly in response order; the service already ranked them
  return el("ol", { "data-role": "recommendations" }, items.map((item) =>
    el("li", {}, [
      `${item.vehicleId} (${item.type}) ${fmtMoney(item.costPerKm)}/km, ` +
      `${item.distanceKm.toFixed(3)} km away, score ${fmtScore(item.score)}, ` +
      `predicted ${item.predictedRating === null ? "unrated" : fmtStars(item.predictedRating)}`,
    ])));
}

export async function submitBooking(
  root: { panel: HTMLElement; status: HTMLElement },
  ctx: ViewContext,
  form: {
    pickupLat: number; pickupLon: number;
    dropLat: number; dropLon: number;
    vehicleType: string; maxCost?: string; maxRadiusKm?: number;
  },
): Promise<TripItem | null> {
  root.status.textContent = "";
  const problem = locationProblem(form.pickupLat, form.pickupLon)
    ?? locationProblem(form.dropLat, form.dropLon);
  if (problem !== null) {
    root.status.textContent = problem;
    return null;
  }
  try {
    const ranked = await ctx.api.recommendations({
      lat: form.pickupLat,
      lon: form.pickupLon,
      type: form.vehicleType || undefined,
      maxCost: form.maxCost,
    });
    clear(root.panel);
    root.panel.append(recommendationList(ranked.items));

    const trip = await ctx.api.submitRequest({
      pickup: { lat: form.pickupLat, lon: form.pickupLon },
      dropoff: { lat: form.dropLat, lon: form.dropLon },
      vehicleType: form.vehicleType,
      maxRadiusKm: form.maxRadiusKm,
    });
    myTrips.unshift(trip);
    root.status.textContent =
      `booked ${trip.tripId}: vehicle ${trip.vehicleId}, ${fmtKm(trip.plannedKm)}, ` +
      `quoted ${fmtMoney(trip.quotedCost)}`;
    return trip;
  } catch (err) {
    root.status.textContent = err instanceof ApiError
      ? `${err.code}: ${err.message}`
      : String(err);
    return null;
  }
}

function renderBook(root: HTMLElement, ctx: ViewContext): Promise<void> {
  const pickupLat = textInput("pickupLat", "pickup lat");
  const pickupLon = textInput("pickupLon", "pickup lon");
  const dropLat = textInput("dropLat", "dropoff lat");
  const dropLon = textInput("dropLon", "dropoff lon");
  const typeField = textInput("vehicleType", "vehicle type", "van");
  const budgetField = textInput("maxCost", "max cost per km (optional)");
  const radiusField = textInput("maxRadiusKm", "search radius km (optional)");
  const status = el("p", { class: "status", "data-role": "booking-status" });
  const panel = el("div", { class: "card", "data-role": "recommendation-panel" });

  root.append(
    el("h2", {}, ["Book a trip"]),
    el("div", { class: "field-row" }, [pickupLat, pickupLon]),
    el("div", { class: "field-row" }, [dropLat, dropLon]),
    el("div", { class: "field-row" }, [typeField, budgetField, radiusField]),
    el("button", {
      type: "button",
      "data-role": "book-submit",
      onclick: () => {
        void submitBooking({ panel, status }, ctx, {
          pickupLat: Number(pickupLat.value),
          pickupLon: Number(pickupLon.value),
          dropLat: Number(dropLat.value),
          dropLon: Number(dropLon.value),
          vehicleType: typeField.value.trim(),
          maxCost: budgetField.value.trim() || undefined,
          maxRadiusKm: radiusField.value.trim() ? Number(radiusField.value) : undefined,
        });
      },
    }, ["Get recommendations and book"]),
    status,
    el("h3", {}, ["Recommended for this pickup"]),
    panel,
  );
  return Promise.resolve();
}

async function renderTrips(root: HTMLElement, ctx: ViewContext): Promise<void> {
  root.append(el("h2", {}, ["My trips"]));
  const lookupField = textInput("tripId", "trip id");
  const detail = el("div", {});

  async function showTrip(tripId: string): Promise<void> {
    clear(detail);
    try {
      const trip = await ctx.api.tripDetail(tripId);
      const lines = [
        `state ${trip.state}, vehicle ${trip.vehicleId}, planned ${fmtKm(trip.plannedKm)}, ` +
        `quoted ${fmtMoney(trip.quotedCost)}`,
      ];
      if (trip.state === "Completed") {
        lines.push(`actual ${fmtKm(trip.actualKm)}, final cost ${fmtMoney(trip.finalCost)}`);
      }
      detail.append(el("div", { class: "card" }, [
        el("h3", {}, [trip.tripId]),
        ...lines.map((line) => el("p", {}, [line])),
      ]));
      if (trip.state === "Completed") {
        const payBtn = el("button", { type: "button" }, ["Pay"]);
        payBtn.addEventListener("click", () => {
          void ctx.api.payTrip(tripId)
            .then((paid) => detail.append(el("p", {}, [`paid ${fmtMoney(paid.amount)}`])))
            .catch((err) => detail.append(errorBanner(err)));
        });
        const starsField = textInput("stars", "stars 1..5");
        const textField = textInput("text", "review text");
        const reviewBtn = el("button", { type: "button", class: "secondary" }, ["Review"]);
        reviewBtn.addEventListener("click", () => {
          void ctx.api.submitReview({
            tripId, stars: Number(starsField.value), text: textField.value,
          })
            .then((rev) => detail.append(el("p", {}, [`review recorded: ${rev.sentiment}`])))
            .catch((err) => detail.append(errorBanner(err)));
        });
        const qrBtn = el("button", { type: "button", class: "secondary" }, ["Show QR"]);
        const qrCanvas = el("canvas", { width: "320", height: "320", "data-role": "qr-canvas" });
        qrBtn.addEventListener("click", () => {
          void ctx.api.tripQr(tripId).then((qr) => {
            const grid = parsePbm(qr.pbm);
            const drawCtx = qrCanvas.getContext("2d") as Ctx2D | null;
            if (drawCtx !== null) drawQr(drawCtx, grid, Math.floor(320 / grid.length));
            const blob = new Blob([qr.pbm], { type: "image/x-portable-bitmap" });
            const link = el("a", {
              href: URL.createObjectURL(blob),
              download: `${tripId}.pbm`,
            }, [`download PBM (version ${qr.version ?? "?"})`]);
            detail.append(link);
          }).catch((err) => detail.append(errorBanner(err)));
        });
        detail.append(
          el("div", { class: "field-row" }, [payBtn, starsField, textField, reviewBtn]),
          el("div", {}, [qrBtn, qrCanvas]),
        );
      }
    } catch (err) {
      detail.append(errorBanner(err));
    }
  }

  root.append(
    el("div", { class: "field-row" }, [
      lookupField,
      el("button", { type: "button", onclick: () => void showTrip(lookupField.value.trim()) },
        ["Open"]),
    ]),
    el("ul", {}, myTrips.map((trip) => {
      const link = el("a", { href: "#" }, [`${trip.tripId} (${fmtKm(trip.plannedKm)})`]);
      link.addEventListener("click", (ev) => { ev.preventDefault(); void showTrip(trip.tripId); });
      return el("li", {}, [link]);
    })),
    detail,
  );
  return Promise.resolve();
}

function renderTrack(root: HTMLElement, ctx: ViewContext): Promise<void> {
  poller?.stop();
  const tripField = textInput("tripId", "trip id", myTrips[0]?.tripId ?? "");
  const message = el("p", { class: "status", "data-role": "tracking-message" });
  const canvas = el("canvas", { width: "560", height: "340", "data-role": "tracking-map" });
  const distance = el("p", { "data-role": "tracking-distance" });

  let fixes: PositionFix[] = [];
  // set once the user pans or zooms; cleared by Fit to follow the trip again
  let manualVp: Viewport | null = null;

  function currentVp(): Viewport {
    return manualVp ?? fitTrack(fixes, 560, 340);
  }

  function draw(): void {
    const drawCtx = canvas.getContext("2d") as Ctx2D | null;
    if (drawCtx !== null && fixes.length > 0) {
      drawTrack(drawCtx, currentVp(), fixes);
    }
  }

  function repaint(snap: TrackerSnapshot): void {
    if (snap.phase === "awaiting") message.textContent = "awaiting telemetry";
    else if (snap.phase === "unavailable") message.textContent = "tracking unavailable";
    else if (snap.phase === "completed") message.textContent = "trip completed";
    else message.textContent = `live, ${snap.fixes.length} fixes`;

    fixes = snap.fixes;
    draw();
    if (snap.phase === "completed") {
      // the label comes from the trip record, not from our own geometry
      void ctx.api.tripDetail(tripField.value.trim()).then((trip) => {
        distance.textContent = `distance driven: ${fmtKm(trip.actualKm)}`;
      });
    }
  }

  let dragFrom: { x: number; y: number } | null = null;
  canvas.addEventListener("mousedown", (ev) => {
    dragFrom = { x: ev.clientX, y: ev.clientY };
  });
  canvas.addEventListener("mousemove", (ev) => {
    if (dragFrom === null || fixes.length === 0) return;
    manualVp = panBy(currentVp(), ev.clientX - dragFrom.x, ev.clientY - dragFrom.y);
    dragFrom = { x: ev.clientX, y: ev.clientY };
    draw();
  });
  const endDrag = (): void => { dragFrom = null; };
  canvas.addEventListener("mouseup", endDrag);
  canvas.addEventListener("mouseleave", endDrag);
  canvas.addEventListener("wheel", (ev) => {
    if (fixes.length === 0) return;
    ev.preventDefault();
    manualVp = zoomAt(currentVp(), ev.deltaY < 0 ? 1.25 : 0.8,
                      { x: ev.offsetX, y: ev.offsetY });
    draw();
  });

  root.append(
    el("h2", {}, ["Live tracking"]),
    el("div", { class: "field-row" }, [
      tripField,
      el("button", {
        type: "button",
        onclick: () => {
          poller?.stop();
          manualVp = null;
          poller = new TrackPoller(
            (tripId) => ctx.api.tripPosition(tripId),
            tripField.value.trim(),
            repaint,
          );
          poller.start();
        },
      }, ["Watch"]),
      el("button", { type: "button", class: "secondary", onclick: () => poller?.stop() },
        ["Stop"]),
      el("button", {
        type: "button",
        class: "secondary",
        onclick: () => { manualVp = null; draw(); },
      }, ["Fit"]),
    ]),
    message,
    canvas,
    distance,
  );
  return Promise.resolve();
}

export function renderCustomer(root: HTMLElement, ctx: ViewContext): void {
  clear(root);
  const handlers: Record<string, (r: HTMLElement, c: ViewContext) => Promise<void>> = {
    book: renderBook,
    trips: renderTrips,
    track: renderTrack,
  };
  const handler = handlers[ctx.state.activeView];
  if (handler === undefined) return;
  handler(root, ctx).catch((err) => root.append(errorBanner(err)));
}
