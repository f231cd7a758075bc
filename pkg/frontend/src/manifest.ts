import { writeFileSync } from "node:fs";
import Papa from "papaparse";

export interface ManifestRow {
  reference: string;
  degraded: string;
  /** Human rating for the pair, typically MOS in [1, 5]. */
  score: number;
}

/** Write the rated-pairs CSV that `evaluate` consumes. */
export function writeManifest(path: string, rows: ManifestRow[]): void {
  const csv = Papa.unparse({
    fields: ["reference", "degraded", "score"],
    data: rows.map(row => [row.reference, row.degraded, row.score]),
  });
  writeFileSync(path, csv + "\n");
}
