#!/usr/bin/env node
/** CLI: plot-hist --out fig.svg report.txt */

import * as fs from "fs";

import { renderHistFigure } from "./hist";
import { parseResidualReport } from "./report";

export function parseArgs(argv: string[]): { out: string; report: string } {
  let out = "";
  let report = "";
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--out") {
      out = argv[++i] ?? "";
    } else if (!report) {
      report = argv[i];
    } else {
      throw new Error(`unexpected argument "${argv[i]}"`);
    }
  }
  if (!out) throw new Error("--out is required");
  if (!report) throw new Error("a report file is required");
  return { out, report };
}

export function main(argv: string[]): void {
  const { out, report } = parseArgs(argv);
  const parsed = parseResidualReport(fs.readFileSync(report, "utf8"));
  fs.writeFileSync(out, renderHistFigure(parsed));
}

if (require.main === module) {
  try {
    main(process.argv.slice(2));
  } catch (err) {
    console.error(`plot-hist: ${(err as Error).message}`);
    process.exit(1);
  }
}
