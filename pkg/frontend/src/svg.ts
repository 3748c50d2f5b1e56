/** Minimal deterministic SVG figure scaffolding (no timestamps, fixed style). */

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { top: 30, right: 30, bottom: 55, left: 75 };

export const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
export const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/** Fixed-precision coordinate formatting so output bytes are stable. */
export function fmt(v: number): string {
  return v.toFixed(2);
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Affine map from a data interval onto a pixel interval. */
export function linearScale(
  d0: number, d1: number, r0: number, r1: number,
): (v: number) => number {
  const span = d1 - d0 || 1;
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

/** Evenly spaced ticks covering [lo, hi], endpoints included. */
export function linearTicks(lo: number, hi: number, count: number): number[] {
  const ticks: number[] = [];
  for (let i = 0; i < count; i++) {
    ticks.push(lo + ((hi - lo) * i) / (count - 1));
  }
  return ticks;
}

/** Powers of ten covering [lo, hi] (both > 0). */
export function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  const e0 = Math.ceil(Math.log10(lo) - 1e-9);
  const e1 = Math.floor(Math.log10(hi) + 1e-9);
  for (let e = e0; e <= e1; e++) {
    ticks.push(Math.pow(10, e));
  }
  return ticks;
}

export function svgDocument(body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">\n` +
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>\n` +
    body +
    `</svg>\n`
  );
}

export function axisLabels(xLabel: string, yLabel: string): string {
  const cx = MARGIN.left + PLOT_W / 2;
  const cy = MARGIN.top + PLOT_H / 2;
  return (
    `<text x="${fmt(cx)}" y="${HEIGHT - 12}" text-anchor="middle" font-size="14">` +
    `${escapeXml(xLabel)}</text>\n` +
    `<text x="18" y="${fmt(cy)}" text-anchor="middle" font-size="14" ` +
    `transform="rotate(-90 18 ${fmt(cy)})">${escapeXml(yLabel)}</text>\n`
  );
}

export function plotFrame(): string {
  return (
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${PLOT_W}" height="${PLOT_H}" ` +
    `fill="none" stroke="#000000" stroke-width="1"/>\n`
  );
}
