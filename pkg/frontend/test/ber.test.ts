import { describe, expect, it } from "vitest";

import { BER_FLOOR, renderBerFigure } from "../src/ber";
import { parseBerCsv } from "../src/csv";
import { makeCsv } from "./fixtures";

function curve(label: string, rows: [number, number][]) {
  return { label, rows: parseBerCsv(makeCsv(rows)) };
}

describe("renderBerFigure", () => {
  it("renders two connected markers for a two-point curve", () => {
    const svg = renderBerFigure([curve("base", [[4, 1e-1], [8, 1e-3]])]);
    expect(svg.startsWith("<svg")).toBe(true);
    expect((svg.match(/<path d="M/g) ?? []).length).toBe(1);
    // Two data markers plus one legend marker.
    expect((svg.match(/<circle/g) ?? []).length).toBe(3);
    expect(svg).toContain("base");
    expect(svg).toContain("Es/N0 (dB)");
  });

  it("floors zero BER and draws it hollow", () => {
    const svg = renderBerFigure([curve("c", [[4, 1e-2], [8, 0]])]);
    expect(svg).toContain(`fill="#ffffff" stroke="#1f77b4"`);
    expect(svg).toContain("1e-7"); // floor decade appears as a tick label
    expect(BER_FLOOR).toBe(1e-7);
  });

  it("renders three labelled curves with distinct colors", () => {
    const svg = renderBerFigure([
      curve("unquantized", [[4, 1e-2], [6, 1e-4], [8, 1e-6]]),
      curve("one-bit", [[4, 1.2e-1], [6, 1.1e-1], [8, 1e-1]]),
      curve("one-bit AE", [[4, 5e-2], [6, 1e-3], [8, 1e-5]]),
    ]);
    for (const color of ["#1f77b4", "#d62728", "#2ca02c"]) {
      expect(svg).toContain(color);
    }
    for (const label of ["unquantized", "one-bit", "one-bit AE"]) {
      expect(svg).toContain(label);
    }
  });

  it("is deterministic byte-for-byte", () => {
    const curves = [curve("a", [[4, 1e-2], [8, 0]]),
                    curve("b", [[4, 2e-2], [8, 1e-5]])];
    expect(renderBerFigure(curves)).toBe(renderBerFigure(curves));
  });

  it("rejects duplicate labels and empty input", () => {
    expect(() => renderBerFigure([])).toThrow(/no curves/);
    const c = curve("x", [[4, 1e-2]]);
    expect(() => renderBerFigure([c, c])).toThrow(/unique/);
  });

  it("escapes markup in labels", () => {
    const svg = renderBerFigure([curve("a<b>&\"c\"", [[4, 1e-2]])]);
    expect(svg).toContain("a&lt;b&gt;&amp;&quot;c&quot;");
  });
});
