import { CSV_HEADER } from "../src/csv";

export function makeCsv(rows: [number, number][]): string {
  const lines = [CSV_HEADER];
  for (const [es, ber] of rows) {
    const bits = 32400;
    const errs = Math.round(ber * bits);
    lines.push(`${es},100,${errs},${bits},${ber.toExponential(6)},0.000`);
  }
  return lines.join("\n") + "\n";
}

/** Deterministic pseudo-random stream (no Math.random in tests). */
export function lcg(seed: number): () => number {
  let s = seed >>> 0;
  return () => {
    s = (s * 1664525 + 1013904223) >>> 0;
    return s / 2 ** 32;
  };
}

export function normalSamples(n: number, seed: number): number[] {
  const u = lcg(seed);
  const out: number[] = [];
  while (out.length < n) {
    const a = Math.max(u(), 1e-12);
    const b = u();
    const r = Math.sqrt(-2 * Math.log(a));
    out.push(r * Math.cos(2 * Math.PI * b));
    out.push(r * Math.sin(2 * Math.PI * b));
  }
  return out.slice(0, n);
}

export function makeReport(samples: number[], pValue: number): string {
  const lines = [
    "# onebitae gp-theory report",
    "[closed_form_vs_quadrature]",
    "rho relu_closed relu_quad relu_err sign_closed sign_quad sign_err",
    "0.0000 1.0e-1 1.0e-1 0.0e0 1.0e-1 1.0e-1 0.0e0",
    "[normality]",
    `samples=${samples.length}`,
    "coords_total=48",
    "coords_consistent=43",
    "skewness=0.012000",
    "excess_kurtosis=-0.034000",
    "statistic=1.200000",
    `p_value=${pValue.toExponential(6)}`,
    "alpha=0.01",
    `verdict=${pValue < 0.01 ? "reject" : "consistent"}`,
    "max_cdf_deviation=0.015000",
    "[residual_samples]",
  ];
  for (const v of samples) {
    lines.push(v.toExponential(9));
  }
  return lines.join("\n") + "\n";
}
