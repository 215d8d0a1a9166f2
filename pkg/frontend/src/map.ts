import type { PositionFix } from "./types.js";

// The slice of CanvasRenderingContext2D the console actually draws with.
// Tests substitute a recording stub, since jsdom ships no 2D context.
export interface Ctx2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  arc(x: number, y: number, radius: number, start: number, end: number): void;
  fill(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
}

// km per degree of latitude; only used to annotate the scale bar
export const KM_PER_DEG = 111.1950802335329;

/** A window onto the plain lat/lon plane: same degree scale on both axes. */
export interface Viewport {
  centerLat: number;
  centerLon: number;
  degPerPx: number;
  widthPx: number;
  heightPx: number;
}

const MIN_DEG_PER_PX = 1e-7;

export function fitTrack(points: readonly PositionFix[], widthPx: number,
                         heightPx: number, padPx = 24): Viewport {
  if (points.length === 0) {
    return { centerLat: 0, centerLon: 0, degPerPx: 0.01, widthPx, heightPx };
  }
  let minLat = points[0].lat, maxLat = points[0].lat;
  let minLon = points[0].lon, maxLon = points[0].lon;
  for (const p of points) {
    minLat = Math.min(minLat, p.lat);
    maxLat = Math.max(maxLat, p.lat);
    minLon = Math.min(minLon, p.lon);
    maxLon = Math.max(maxLon, p.lon);
  }
  const usableW = Math.max(1, widthPx - 2 * padPx);
  const usableH = Math.max(1, heightPx - 2 * padPx);
  const degPerPx = Math.max(
    MIN_DEG_PER_PX,
    (maxLat - minLat) / usableH,
    (maxLon - minLon) / usableW,
  );
  return {
    centerLat: (minLat + maxLat) / 2,
    centerLon: (minLon + maxLon) / 2,
    degPerPx,
    widthPx,
    heightPx,
  };
}

export function project(vp: Viewport, lat: number, lon: number): { x: number; y: number } {
  return {
    x: vp.widthPx / 2 + (lon - vp.centerLon) / vp.degPerPx,
    y: vp.heightPx / 2 - (lat - vp.centerLat) / vp.degPerPx,
  };
}

export function unproject(vp: Viewport, x: number, y: number): { lat: number; lon: number } {
  return {
    lat: vp.centerLat - (y - vp.heightPx / 2) * vp.degPerPx,
    lon: vp.centerLon + (x - vp.widthPx / 2) * vp.degPerPx,
  };
}

/** Drag the scene by (dxPx, dyPx): whatever was at a pixel moves there + d. */
export function panBy(vp: Viewport, dxPx: number, dyPx: number): Viewport {
  return {
    ...vp,
    centerLon: vp.centerLon - dxPx * vp.degPerPx,
    centerLat: vp.centerLat + dyPx * vp.degPerPx,
  };
}

/** Zoom by factor, keeping the geo point under the anchor pixel fixed. */
export function zoomAt(vp: Viewport, factor: number,
                       anchor: { x: number; y: number }): Viewport {
  const fixed = unproject(vp, anchor.x, anchor.y);
  const degPerPx = Math.max(MIN_DEG_PER_PX, vp.degPerPx / factor);
  return {
    ...vp,
    degPerPx,
    centerLon: fixed.lon - (anchor.x - vp.widthPx / 2) * degPerPx,
    centerLat: fixed.lat + (anchor.y - vp.heightPx / 2) * degPerPx,
  };
}

/** Longest 1-2-5 ladder distance whose bar fits into maxPx. */
export function scaleBar(vp: Viewport, maxPx = 140): { px: number; label: string } {
  const kmPerPx = vp.degPerPx * KM_PER_DEG;
  const maxKm = maxPx * kmPerPx;
  const base = 10 ** Math.floor(Math.log10(maxKm));
  let best = base;
  for (const mult of [2, 5, 10]) {
    if (base * mult <= maxKm) best = base * mult;
  }
  const label = best >= 1 ? `${best} km` : `${Math.round(best * 1000)} m`;
  return { px: best / kmPerPx, label };
}

export interface TrackStyle {
  line: string;
  start: string;
  marker: string;
}

const DEFAULT_STYLE: TrackStyle = {
  line: "#2563eb",
  start: "#16a34a",
  marker: "#dc2626",
};

/**
 * Paint a track: polyline, green start dot, red marker on the newest fix,
 * and the scale bar in the bottom-left corner.
 */
export function drawTrack(ctx: Ctx2D, vp: Viewport,
                          points: readonly PositionFix[],
                          style: TrackStyle = DEFAULT_STYLE): void {
  ctx.clearRect(0, 0, vp.widthPx, vp.heightPx);
  if (points.length > 0) {
    ctx.strokeStyle = style.line;
    ctx.lineWidth = 2;
    ctx.beginPath();
    const first = project(vp, points[0].lat, points[0].lon);
    ctx.moveTo(first.x, first.y);
    for (const p of points.slice(1)) {
      const at = project(vp, p.lat, p.lon);
      ctx.lineTo(at.x, at.y);
    }
    ctx.stroke();

    ctx.fillStyle = style.start;
    ctx.beginPath();
    ctx.arc(first.x, first.y, 4, 0, 2 * Math.PI);
    ctx.fill();

    const newest = points[points.length - 1];
    const head = project(vp, newest.lat, newest.lon);
    ctx.fillStyle = style.marker;
    ctx.beginPath();
    ctx.arc(head.x, head.y, 6, 0, 2 * Math.PI);
    ctx.fill();
  }

  const bar = scaleBar(vp);
  const y = vp.heightPx - 16;
  ctx.strokeStyle = "#111";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(12, y);
  ctx.lineTo(12 + bar.px, y);
  ctx.stroke();
  ctx.fillStyle = "#111";
  ctx.font = "11px sans-serif";
  ctx.fillText(bar.label, 12, y - 4);
}
