import type { Ctx2D } from "./map.js";
import type { SentimentReport } from "./types.js";

export interface Bar {
  label: string;
  count: number;
  px: number;
}

/**
 * Scale the three sentiment counts to bar lengths. The counts themselves
 * render verbatim next to each bar; only the pixel width is derived.
 */
export function sentimentBars(report: SentimentReport, maxPx: number): Bar[] {
  const rows: Array<[string, number]> = [
    ["positive", report.positive],
    ["negative", report.negative],
    ["neutral", report.neutral],
  ];
  const top = Math.max(1, ...rows.map(([, count]) => count));
  return rows.map(([label, count]) => ({
    label,
    count,
    px: Math.round((count / top) * maxPx),
  }));
}

const BAR_COLORS: Record<string, string> = {
  positive: "#16a34a",
  negative: "#dc2626",
  neutral: "#6b7280",
};

export function drawBars(ctx: Ctx2D, bars: Bar[], widthPx: number, heightPx: number): void {
  ctx.clearRect(0, 0, widthPx, heightPx);
  const rowH = Math.floor(heightPx / bars.length);
  const barH = Math.max(10, rowH - 22);
  bars.forEach((bar, i) => {
    const top = i * rowH + 14;
    ctx.fillStyle = "#111";
    ctx.font = "12px sans-serif";
    ctx.fillText(`${bar.label}: ${bar.count}`, 8, top - 3);
    ctx.fillStyle = BAR_COLORS[bar.label] ?? "#2563eb";
    ctx.fillRect(8, top, bar.px, barH);
  });
}
