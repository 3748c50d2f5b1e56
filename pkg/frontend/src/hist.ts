/** Residual histogram with fitted normal overlay and normality p-value. */

import { ResidualReport } from "./report";
import {
  MARGIN, PLOT_H, PLOT_W,
  axisLabels, fmt, linearScale, linearTicks, plotFrame, svgDocument,
} from "./svg";

export const HIST_BINS = 41;

export interface HistStats {
  mean: number;
  std: number;
}

export function sampleStats(samples: number[]): HistStats {
  const n = samples.length;
  const mean = samples.reduce((a, b) => a + b, 0) / n;
  const varSum = samples.reduce((a, b) => a + (b - mean) * (b - mean), 0);
  return { mean, std: Math.sqrt(varSum / n) };
}

function normalPdf(x: number, mean: number, std: number): number {
  const z = (x - mean) / std;
  return Math.exp(-0.5 * z * z) / (std * Math.sqrt(2 * Math.PI));
}

/**
 * Render a density-normalized histogram of the residual samples, overlay
 * the normal density at the sample (mean, std), and annotate the report's
 * normality p-value.
 */
export function renderHistFigure(report: ResidualReport): string {
  const { samples, normality } = report;
  const { mean, std } = sampleStats(samples);
  if (!(std > 0)) {
    throw new Error("residual samples are constant; nothing to plot");
  }

  const lo = Math.min(...samples);
  const hi = Math.max(...samples);
  const binW = (hi - lo) / HIST_BINS || 1;
  const counts = new Array<number>(HIST_BINS).fill(0);
  for (const v of samples) {
    let b = Math.floor((v - lo) / binW);
    if (b >= HIST_BINS) b = HIST_BINS - 1;
    counts[b] += 1;
  }
  const density = counts.map((c) => c / (samples.length * binW));

  const peak = Math.max(...density, normalPdf(mean, mean, std));
  const sx = linearScale(lo, hi, MARGIN.left, MARGIN.left + PLOT_W);
  const sy = linearScale(0, peak * 1.08, MARGIN.top + PLOT_H, MARGIN.top);

  let body = "";

  // Ticks.
  for (const t of linearTicks(lo, hi, 7)) {
    const px = sx(t);
    body += `<line x1="${fmt(px)}" y1="${MARGIN.top}" x2="${fmt(px)}" ` +
      `y2="${MARGIN.top + PLOT_H}" stroke="#eeeeee" stroke-width="1"/>\n`;
    body += `<text x="${fmt(px)}" y="${MARGIN.top + PLOT_H + 20}" ` +
      `text-anchor="middle" font-size="12">${t.toFixed(3)}</text>\n`;
  }
  for (const t of linearTicks(0, peak * 1.08, 5)) {
    const py = sy(t);
    body += `<text x="${MARGIN.left - 8}" y="${fmt(py + 4)}" ` +
      `text-anchor="end" font-size="12">${t.toFixed(2)}</text>\n`;
  }

  // Histogram bars.
  for (let b = 0; b < HIST_BINS; b++) {
    const x = sx(lo + b * binW);
    const w = sx(lo + (b + 1) * binW) - x;
    const y = sy(density[b]);
    const h = MARGIN.top + PLOT_H - y;
    if (h <= 0) continue;
    body += `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ` +
      `fill="#9ecae1" stroke="#4292c6" stroke-width="0.5"/>\n`;
  }

  // Fitted normal overlay.
  const overlay: string[] = [];
  const steps = 200;
  for (let i = 0; i <= steps; i++) {
    const x = lo + ((hi - lo) * i) / steps;
    overlay.push(
      `${i === 0 ? "M" : "L"}${fmt(sx(x))} ${fmt(sy(normalPdf(x, mean, std)))}`);
  }
  body += `<path d="${overlay.join(" ")}" fill="none" stroke="#d62728" stroke-width="2"/>\n`;

  // Annotation: fitted moments and normality verdict.
  const ax = MARGIN.left + 12;
  let ay = MARGIN.top + 18;
  const note = [
    `N(${mean.toFixed(4)}, ${(std * std).toFixed(4)})`,
    `n = ${samples.length}`,
    `normality p = ${normality.pValue.toExponential(3)}`,
    `verdict: ${normality.verdict} at alpha = ${normality.alpha}`,
  ];
  if (normality.coordsTotal !== undefined) {
    note.push(
      `coords consistent: ${normality.coordsConsistent}/${normality.coordsTotal}`);
  }
  for (const line of note) {
    body += `<text x="${ax}" y="${fmt(ay)}" font-size="12">${line}</text>\n`;
    ay += 16;
  }

  body += plotFrame();
  body += axisLabels("residual value", "density");
  return svgDocument(body);
}
