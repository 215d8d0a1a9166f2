import { ApiError } from "../api.js";
import { sentimentBars, drawBars } from "../charts.js";
import type { ViewContext } from "../context.js";
import { clear, el } from "../dom.js";
import { fmtStars, fmtWhen } from "../format.js";
import type { Ctx2D } from "../map.js";

function errorBanner(err: unknown): HTMLElement {
  const text = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
  return el("p", { class: "error" }, [text]);
}

async function renderApprovals(root: HTMLElement, ctx: ViewContext): Promise<void> {
  const listing = await ctx.api.adminProviders();
  const rows = listing.items.map((p) => {
    const cells = [
      el("td", {}, [p.providerId]),
      el("td", {}, [p.login]),
      el("td", {}, [p.name]),
      el("td", {}, [p.status]),
    ];
    const action = el("td", {});
    if (p.status === "Pending") {
      action.append(el("button", {
        type: "button",
        onclick: () => {
          void ctx.api.approveProvider(p.providerId).then(() => ctx.rerender());
        },
      }, ["Approve"]));
    }
    cells.push(action);
    return el("tr", {}, cells);
  });
  root.append(
    el("h2", {}, ["Provider approvals"]),
    el("table", {}, [
      el("thead", {}, [el("tr", {}, ["id", "login", "name", "status", ""].map(
        (h) => el("th", {}, [h])))]),
      el("tbody", {}, rows),
    ]),
  );
}

async function renderSentiment(root: HTMLElement, ctx: ViewContext): Promise<void> {
  const report = await ctx.api.adminSentiment();
  const canvas = el("canvas", { width: "420", height: "180", "data-role": "sentiment-chart" });
  root.append(el("h2", {}, ["Review sentiment"]), canvas);
  const bars = sentimentBars(report, 380);
  const drawCtx = canvas.getContext("2d") as Ctx2D | null;
  if (drawCtx !== null) {
    drawBars(drawCtx, bars, 420, 180);
  }
  // the counts also render as text so the numbers stay selectable
  root.append(el("p", { "data-role": "sentiment-counts" }, [
    `positive ${report.positive} / negative ${report.negative} / neutral ${report.neutral}`,
  ]));
}

async function renderRankings(root: HTMLElement, ctx: ViewContext): Promise<void> {
  const listing = await ctx.api.adminRankings();
  root.append(
    el("h2", {}, ["Provider rankings"]),
    el("table", {}, [
      el("thead", {}, [el("tr", {}, ["provider", "name", "mean stars", "reviews"].map(
        (h) => el("th", {}, [h])))]),
      el("tbody", {}, listing.items.map((r) => el("tr", {}, [
        el("td", {}, [r.providerId]),
        el("td", {}, [r.name ?? ""]),
        el("td", {}, [fmtStars(r.meanStars)]),
        el("td", {}, [String(r.reviewCount)]),
      ]))),
    ]),
  );
}

async function renderSpam(root: HTMLElement, ctx: ViewContext): Promise<void> {
  const listing = await ctx.api.adminSpam();
  root.append(el("h2", {}, ["Spam flags"]));
  if (listing.items.length === 0) {
    root.append(el("p", {}, ["no spam flags"]));
    return;
  }
  root.append(el("ul", {}, listing.items.map((item) =>
    el("li", {}, [`${item.providerId}: ${item.reasons.join("; ")}`]))));
}

async function renderDirectory(root: HTMLElement, ctx: ViewContext): Promise<void> {
  const [providers, customers, vehicles] = await Promise.all([
    ctx.api.adminProviders(), ctx.api.adminCustomers(), ctx.api.adminVehicles()]);
  root.append(
    el("h2", {}, ["Providers"]),
    el("ul", {}, providers.items.map((p) =>
      el("li", {}, [`${p.providerId} ${p.name} (${p.status}), joined ${fmtWhen(p.createdMs)}`]))),
    el("h2", {}, ["Customers"]),
    el("ul", {}, customers.items.map((c) =>
      el("li", {}, [`${c.customerId} ${c.name}, joined ${fmtWhen(c.createdMs)}`]))),
    el("h2", {}, ["Vehicles"]),
    el("ul", {}, vehicles.items.map((v) =>
      el("li", {}, [`${v.vehicleId} ${v.type} at ${v.costPerKm}/km, ${v.status ?? ""}`]))),
  );
}

export function renderAdmin(root: HTMLElement, ctx: ViewContext): void {
  clear(root);
  const surface = ctx.state.activeView;
  const handlers: Record<string, (r: HTMLElement, c: ViewContext) => Promise<void>> = {
    approvals: renderApprovals,
    sentiment: renderSentiment,
    rankings: renderRankings,
    spam: renderSpam,
    directory: renderDirectory,
  };
  const handler = handlers[surface];
  if (handler === undefined) return;
  handler(root, ctx).catch((err) => root.append(errorBanner(err)));
}
