/** Pure builders for the dashboard visuals.

Everything here returns strings or numbers; DOM writes live in main.ts
so the visuals stay testable without a browser.
*/

import type { SeriesPoint } from "./store.js";

/** Polyline points attribute for a sparkline, y grows downward. */
export function sparklinePoints(
  series: SeriesPoint[],
  width: number,
  height: number,
  yMin?: number,
  yMax?: number,
): string {
  if (series.length === 0) return "";
  const t0 = series[0]!.t;
  const t1 = series[series.length - 1]!.t;
  const span = Math.max(t1 - t0, 1e-9);
  let lo = yMin ?? Infinity;
  let hi = yMax ?? -Infinity;
  if (yMin === undefined || yMax === undefined) {
    for (const pt of series) {
      lo = Math.min(lo, pt.value);
      hi = Math.max(hi, pt.value);
    }
  }
  const range = Math.max(hi - lo, 1e-9);
  const coords: string[] = [];
  for (const pt of series) {
    const x = ((pt.t - t0) / span) * width;
    const y = height - ((pt.value - lo) / range) * height;
    coords.push(`${x.toFixed(1)},${y.toFixed(1)}`);
  }
  return coords.join(" ");
}

/** Progress in [0, 1] to a percentage string for a bar width. */
export function progressPercent(progress: number): string {
  const clamped = Math.min(1, Math.max(0, progress));
  return `${(clamped * 100).toFixed(1)}%`;
}

export function formatSeconds(t: number): string {
  return `${t.toFixed(2)} s`;
}

export function formatSigned(x: number): string {
  const sign = x > 0 ? "+" : "";
  return `${sign}${x.toFixed(3)}`;
}
