/** Log-scale BER-vs-Es/N0 figure from harness sweep CSVs. */

import { BerRow } from "./csv";
import {
  MARGIN, PLOT_H, PLOT_W, PALETTE,
  axisLabels, decadeTicks, escapeXml, fmt, linearScale, linearTicks,
  plotFrame, svgDocument,
} from "./svg";

/** Zero BER cannot sit on a log axis; it is drawn at this documented floor. */
export const BER_FLOOR = 1e-7;

export interface Curve {
  label: string;
  rows: BerRow[];
}

const MARKER_R = 4;

function markerFor(x: number, y: number, color: string, hollow: boolean): string {
  const fill = hollow ? "#ffffff" : color;
  return (
    `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${MARKER_R}" ` +
    `fill="${fill}" stroke="${color}" stroke-width="1.5"/>\n`
  );
}

/**
 * Render one curve per CSV on a log y-axis with markers, grid and legend.
 * Zero-BER points are floored at BER_FLOOR and drawn hollow.
 */
export function renderBerFigure(curves: Curve[]): string {
  if (curves.length === 0) {
    throw new Error("no curves to plot");
  }
  const labels = new Set(curves.map((c) => c.label));
  if (labels.size !== curves.length) {
    throw new Error("legend labels must be unique");
  }

  const xs = curves.flatMap((c) => c.rows.map((r) => r.esN0Db));
  const bers = curves.flatMap((c) =>
    c.rows.map((r) => Math.max(r.ber, BER_FLOOR)));
  const x0 = Math.min(...xs);
  const x1 = Math.max(...xs);
  const yLo = Math.min(BER_FLOOR, ...bers);
  const yHi = Math.max(1e-1, ...bers);

  const sx = linearScale(x0, x1, MARGIN.left, MARGIN.left + PLOT_W);
  const sy = linearScale(
    Math.log10(yLo), Math.log10(yHi), MARGIN.top + PLOT_H, MARGIN.top);
  const yPix = (ber: number) => sy(Math.log10(ber));

  let body = "";

  // Grid and ticks.
  for (const t of linearTicks(x0, x1, Math.min(xs.length, 7) || 2)) {
    const px = sx(t);
    body += `<line x1="${fmt(px)}" y1="${MARGIN.top}" x2="${fmt(px)}" ` +
      `y2="${MARGIN.top + PLOT_H}" stroke="#dddddd" stroke-width="1"/>\n`;
    body += `<text x="${fmt(px)}" y="${MARGIN.top + PLOT_H + 20}" ` +
      `text-anchor="middle" font-size="12">${fmt(t)}</text>\n`;
  }
  for (const t of decadeTicks(yLo, yHi)) {
    const py = yPix(t);
    body += `<line x1="${MARGIN.left}" y1="${fmt(py)}" ` +
      `x2="${MARGIN.left + PLOT_W}" y2="${fmt(py)}" stroke="#dddddd" stroke-width="1"/>\n`;
    const e = Math.round(Math.log10(t));
    body += `<text x="${MARGIN.left - 8}" y="${fmt(py + 4)}" ` +
      `text-anchor="end" font-size="12">1e${e}</text>\n`;
  }

  // Curves.
  curves.forEach((curve, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = curve.rows.map((r) => ({
      x: sx(r.esN0Db),
      y: yPix(Math.max(r.ber, BER_FLOOR)),
      hollow: r.ber <= 0,
    }));
    const path = pts
      .map((p, j) => `${j === 0 ? "M" : "L"}${fmt(p.x)} ${fmt(p.y)}`)
      .join(" ");
    body += `<path d="${path}" fill="none" stroke="${color}" stroke-width="1.5"/>\n`;
    for (const p of pts) {
      body += markerFor(p.x, p.y, color, p.hollow);
    }
  });

  // Legend.
  const legendX = MARGIN.left + PLOT_W - 210;
  let legendY = MARGIN.top + 14;
  curves.forEach((curve, i) => {
    const color = PALETTE[i % PALETTE.length];
    body += `<line x1="${legendX}" y1="${fmt(legendY - 4)}" x2="${legendX + 26}" ` +
      `y2="${fmt(legendY - 4)}" stroke="${color}" stroke-width="1.5"/>\n`;
    body += markerFor(legendX + 13, legendY - 4, color, false);
    body += `<text x="${legendX + 32}" y="${fmt(legendY)}" font-size="12">` +
      `${escapeXml(curve.label)}</text>\n`;
    legendY += 18;
  });

  body += plotFrame();
  body += axisLabels("Es/N0 (dB)", "BER");
  return svgDocument(body);
}
