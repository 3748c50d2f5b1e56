#!/usr/bin/env node
/** CLI: plot-ber --out fig.svg curve1.csv:Label1 curve2.csv:Label2 ... */

import * as fs from "fs";

import { renderBerFigure, Curve } from "./ber";
import { parseBerCsv } from "./csv";

export function parseArgs(argv: string[]): { out: string; inputs: [string, string][] } {
  let out = "";
  const inputs: [string, string][] = [];
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--out") {
      out = argv[++i] ?? "";
    } else {
      const sep = arg.lastIndexOf(":");
      if (sep <= 0 || sep === arg.length - 1) {
        throw new Error(`expected path:Label, got "${arg}"`);
      }
      inputs.push([arg.slice(0, sep), arg.slice(sep + 1)]);
    }
  }
  if (!out) throw new Error("--out is required");
  if (inputs.length === 0) throw new Error("at least one curve.csv:Label is required");
  return { out, inputs };
}

export function main(argv: string[]): void {
  const { out, inputs } = parseArgs(argv);
  const curves: Curve[] = inputs.map(([path, label]) => ({
    label,
    rows: parseBerCsv(fs.readFileSync(path, "utf8")),
  }));
  fs.writeFileSync(out, renderBerFigure(curves));
}

if (require.main === module) {
  try {
    main(process.argv.slice(2));
  } catch (err) {
    console.error(`plot-ber: ${(err as Error).message}`);
    process.exit(1);
  }
}
