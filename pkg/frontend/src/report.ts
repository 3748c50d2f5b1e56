/** Parsing for gp-theory report files. */

export interface NormalityInfo {
  samples: number;
  skewness: number;
  excessKurtosis: number;
  statistic: number;
  pValue: number;
  alpha: number;
  verdict: string;
  coordsTotal?: number;
  coordsConsistent?: number;
}

export interface ResidualReport {
  normality: NormalityInfo;
  samples: number[];
}

/**
 * Extract the [normality] key=value block and the [residual_samples]
 * values (one per line) from a gp-theory report.
 */
export function parseResidualReport(text: string): ResidualReport {
  const lines = text.split(/\r?\n/);
  const kv: Record<string, string> = {};
  const samples: number[] = [];
  let section = "";
  for (const raw of lines) {
    const line = raw.trim();
    if (line === "") continue;
    if (line.startsWith("[") && line.endsWith("]")) {
      section = line.slice(1, -1);
      continue;
    }
    if (section === "normality") {
      const eq = line.indexOf("=");
      if (eq > 0) {
        kv[line.slice(0, eq)] = line.slice(eq + 1);
      }
    } else if (section === "residual_samples") {
      const v = Number(line);
      if (!Number.isFinite(v)) {
        throw new Error(`bad residual sample line: "${line}"`);
      }
      samples.push(v);
    }
  }
  if (!("p_value" in kv)) {
    throw new Error("report has no [normality] section with p_value");
  }
  if (samples.length === 0) {
    throw new Error("report has no residual samples");
  }
  const num = (key: string): number => {
    const v = Number(kv[key]);
    if (!Number.isFinite(v)) {
      throw new Error(`missing or non-numeric normality field: ${key}`);
    }
    return v;
  };
  const normality: NormalityInfo = {
    samples: num("samples"),
    skewness: num("skewness"),
    excessKurtosis: num("excess_kurtosis"),
    statistic: num("statistic"),
    pValue: num("p_value"),
    alpha: num("alpha"),
    verdict: kv["verdict"] ?? "",
  };
  if ("coords_total" in kv) normality.coordsTotal = num("coords_total");
  if ("coords_consistent" in kv) normality.coordsConsistent = num("coords_consistent");
  return { normality, samples };
}
