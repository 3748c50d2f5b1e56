/** Parsing for harness sweep CSVs. */

export const CSV_HEADER = "es_n0_db,codewords,bit_errors,bits,ber,seconds";

export interface BerRow {
  esN0Db: number;
  codewords: number;
  bitErrors: number;
  bits: number;
  ber: number;
  seconds: number;
}

/**
 * Parse a sweep CSV produced by the harness. The header must match the
 * schema exactly; every data row needs six finite numeric fields.
 */
export function parseBerCsv(text: string): BerRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.trim() !== "");
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  if (lines[0].trim() !== CSV_HEADER) {
    throw new Error(`bad CSV header: expected "${CSV_HEADER}", got "${lines[0].trim()}"`);
  }
  if (lines.length === 1) {
    throw new Error("CSV has no data rows");
  }
  const rows: BerRow[] = [];
  for (const line of lines.slice(1)) {
    const fields = line.split(",");
    if (fields.length !== 6) {
      throw new Error(`bad CSV row (expected 6 fields): "${line}"`);
    }
    const nums = fields.map(Number);
    if (nums.some((v) => !Number.isFinite(v))) {
      throw new Error(`non-numeric CSV row: "${line}"`);
    }
    rows.push({
      esN0Db: nums[0],
      codewords: nums[1],
      bitErrors: nums[2],
      bits: nums[3],
      ber: nums[4],
      seconds: nums[5],
    });
  }
  return rows;
}
