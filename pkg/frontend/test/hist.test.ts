import { describe, expect, it } from "vitest";

import { renderHistFigure, sampleStats, HIST_BINS } from "../src/hist";
import { parseResidualReport } from "../src/report";
import { lcg, makeReport, normalSamples } from "./fixtures";

function report(samples: number[], p: number) {
  return parseResidualReport(makeReport(samples, p));
}

describe("sampleStats", () => {
  it("recovers the moments of a standard-normal sample", () => {
    const { mean, std } = sampleStats(normalSamples(20000, 3));
    expect(Math.abs(mean)).toBeLessThan(0.03);
    expect(Math.abs(std - 1)).toBeLessThan(0.03);
  });
});

describe("renderHistFigure", () => {
  it("overlays a normal density that hugs a normal histogram", () => {
    const svg = renderHistFigure(report(normalSamples(5000, 7), 0.37));
    expect(svg.startsWith("<svg")).toBe(true);
    expect((svg.match(/<rect x=/g) ?? []).length).toBeGreaterThan(HIST_BINS / 2);
    expect(svg).toContain('stroke="#d62728"'); // overlay curve
    expect(svg).toContain("normality p = 3.700e-1");
    expect(svg).toContain("verdict: consistent at alpha = 0.01");
    expect(svg).toContain("coords consistent: 43/48");
  });

  it("annotates p near zero for uniform samples", () => {
    const u = lcg(11);
    const samples = Array.from({ length: 4000 }, () => u() * 2 - 1);
    const svg = renderHistFigure(report(samples, 1e-30));
    expect(svg).toContain("normality p = 1.000e-30");
    expect(svg).toContain("verdict: reject");
  });

  it("is deterministic byte-for-byte", () => {
    const rep = report(normalSamples(2000, 5), 0.2);
    expect(renderHistFigure(rep)).toBe(renderHistFigure(rep));
  });

  it("rejects constant samples", () => {
    const rep = report(new Array(600).fill(0.5), 0.5);
    expect(() => renderHistFigure(rep)).toThrow(/constant/);
  });
});
