import { ApiError } from "../api.js";
import type { ViewContext } from "../context.js";
import { clear, el, textInput } from "../dom.js";
import { fmtKm, fmtMoney, fmtWhen } from "../format.js";
import { drawTrack, fitTrack, type Ctx2D } from "../map.js";
import type { VehicleItem } from "../types.js";

// vehicles added during this session; the API has no provider fleet listing
const sessionVehicles: VehicleItem[] = [];

function errorBanner(err: unknown): HTMLElement {
  const text = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
  return el("p", { class: "error" }, [text]);
}

async function renderFleet(root: HTMLElement, ctx: ViewContext): Promise<void> {
  const profile = await ctx.api.providerProfile();
  root.append(el("h2", {}, [`${profile.name} (${profile.status})`]));
  if (profile.status !== "Approved") {
    root.append(el("p", { class: "warn" }, [
      "awaiting admin approval; fleet changes are disabled until then",
    ]));
  }

  const status = el("p", { class: "status" });
  const typeField = textInput("type", "vehicle type (van, truck...)");
  const costField = textInput("costPerKm", "cost per km, e.g. 3.50");
  const latField = textInput("lat", "home lat");
  const lonField = textInput("lon", "home lon");

  async function addVehicle(): Promise<void> {
    status.textContent = "";
    try {
      const vehicle = await ctx.api.addVehicle({
        type: typeField.value.trim(),
        costPerKm: costField.value.trim(),
        location: { lat: Number(latField.value), lon: Number(lonField.value) },
      });
      sessionVehicles.push(vehicle);
      ctx.rerender();
    } catch (err) {
      status.textContent = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    }
  }

  const driverLogin = textInput("driverLogin", "driver login");
  const driverPassword = el("input", { name: "driverPassword", placeholder: "driver password", type: "password" });
  const driverName = textInput("driverName", "driver name");

  async function addDriver(): Promise<void> {
    status.textContent = "";
    try {
      const driver = await ctx.api.addDriver({
        login: driverLogin.value.trim(),
        password: driverPassword.value,
        name: driverName.value.trim(),
      });
      status.textContent = `driver ${driver.driverId} (${driver.login}) registered`;
    } catch (err) {
      status.textContent = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    }
  }

  root.append(
    el("h3", {}, ["Add a vehicle"]),
    el("div", { class: "field-row" }, [typeField, costField, latField, lonField]),
    el("button", { type: "button", onclick: () => void addVehicle() }, ["Add vehicle"]),
    el("h3", {}, ["Add a driver"]),
    el("div", { class: "field-row" }, [driverLogin, driverPassword, driverName]),
    el("button", { type: "button", onclick: () => void addDriver() }, ["Add driver"]),
    status,
  );

  if (sessionVehicles.length > 0) {
    root.append(el("h3", {}, ["Vehicles added this session"]));
    for (const vehicle of sessionVehicles) {
      const row = el("div", { class: "card" }, [
        el("span", {}, [`${vehicle.vehicleId} ${vehicle.type} at ${vehicle.costPerKm}/km `]),
      ]);
      const toggle = el("button", { type: "button", class: "secondary" }, ["Toggle maintenance"]);
      toggle.addEventListener("click", () => {
        const wasUp = vehicle.status !== "Maintenance";
        void ctx.api.setVehicleStatus(vehicle.vehicleId, wasUp).then((updated) => {
          vehicle.status = updated.status;
          ctx.rerender();
        });
      });
      row.append(el("span", { class: "muted" }, [` ${vehicle.status ?? "Available"} `]), toggle);

      const canvas = el("canvas", { width: "420", height: "200" });
      const showTrack = el("button", { type: "button", class: "secondary" }, ["Show track"]);
      showTrack.addEventListener("click", () => {
        void ctx.api.vehicleTrack(vehicle.vehicleId).then((track) => {
          const drawCtx = canvas.getContext("2d") as Ctx2D | null;
          if (drawCtx !== null) {
            drawTrack(drawCtx, fitTrack(track.points, 420, 200), track.points);
          }
        });
      });
      row.append(showTrack, canvas);
      root.append(row);
    }
  }
}

async function renderRequests(root: HTMLElement, ctx: ViewContext): Promise<void> {
  const listing = await ctx.api.providerRequests();
  root.append(el("h2", {}, ["Open trips"]));
  if (listing.items.length === 0) {
    root.append(el("p", {}, ["no scheduled or running trips"]));
    return;
  }
  root.append(el("ul", {}, listing.items.map((trip) => el("li", {}, [
    `${trip.tripId} (${trip.state}) vehicle ${trip.vehicleId}, driver ${trip.driverId}, ` +
    `${fmtKm(trip.plannedKm)} quoted ${fmtMoney(trip.quotedCost)}`,
  ]))));

  const vehicleField = textInput("vehicleId", "vehicle id");
  const out = el("div", {});
  root.append(
    el("h3", {}, ["Vehicle schedule"]),
    el("div", { class: "field-row" }, [
      vehicleField,
      el("button", {
        type: "button",
        onclick: () => {
          void ctx.api.vehicleSchedule(vehicleField.value.trim()).then((schedule) => {
            clear(out);
            out.append(el("ul", {}, schedule.entries.map((entry) => el("li", {}, [
              `${entry.tripId}: ${fmtWhen(entry.startMs)} to ${fmtWhen(entry.endMs)}`,
            ]))));
          }).catch((err) => { clear(out); out.append(errorBanner(err)); });
        },
      }, ["Look up"]),
    ]),
    out,
  );
}

async function renderHistory(root: HTMLElement, ctx: ViewContext): Promise<void> {
  const listing = await ctx.api.providerHistory();
  root.append(el("h2", {}, ["Completed trips"]));
  if (listing.items.length === 0) {
    root.append(el("p", {}, ["nothing completed yet"]));
    return;
  }
  root.append(el("table", {}, [
    el("thead", {}, [el("tr", {}, ["trip", "completed", "distance", "cost", "paid"].map(
      (h) => el("th", {}, [h])))]),
    el("tbody", {}, listing.items.map((item) => el("tr", {}, [
      el("td", {}, [item.tripId]),
      el("td", {}, [fmtWhen(item.completedMs)]),
      el("td", {}, [fmtKm(item.actualKm)]),
      el("td", {}, [fmtMoney(item.finalCost)]),
      el("td", {}, [item.paid ? "yes" : "no"]),
    ]))),
  ]));
}

async function renderNotify(root: HTMLElement, ctx: ViewContext): Promise<void> {
  const driverField = textInput("driverId", "driver id");
  const tripField = textInput("tripId", "trip id (optional)");
  const messageField = textInput("message", "message");
  const status = el("p", { class: "status" });
  root.append(
    el("h2", {}, ["Notify a driver"]),
    el("div", { class: "field-row" }, [driverField, tripField]),
    el("div", { class: "field-row" }, [messageField]),
    el("button", {
      type: "button",
      onclick: () => {
        const body: { driverId: string; message: string; tripId?: string } = {
          driverId: driverField.value.trim(),
          message: messageField.value,
        };
        const tripId = tripField.value.trim();
        if (tripId.length > 0) body.tripId = tripId;
        void ctx.api.sendNotification(body)
          .then((sent) => { status.textContent = `sent ${sent.notificationId}`; })
          .catch((err) => {
            status.textContent = err instanceof ApiError
              ? `${err.code}: ${err.message}` : String(err);
          });
      },
    }, ["Send"]),
    status,
  );
}

export function renderProvider(root: HTMLElement, ctx: ViewContext): void {
  clear(root);
  const handlers: Record<string, (r: HTMLElement, c: ViewContext) => Promise<void>> = {
    fleet: renderFleet,
    requests: renderRequests,
    history: renderHistory,
    notify: renderNotify,
  };
  const handler = handlers[ctx.state.activeView];
  if (handler === undefined) return;
  handler(root, ctx).catch((err) => root.append(errorBanner(err)));
}
