/**
 * Word-count rule, re-implemented independently of the analysis engine.
 *
 * A kernel's word count is the number of its feature-map pixels strictly
 * greater than the nearest-rank quantile of that map (level 0.9: the top 10%
 * of pixel values).  Must agree exactly with the engine on shared
 * activations; that agreement is the cross-implementation contract.
 */

import type { CapturedLayer } from "./forward.js";

/** Ascending-sorted element at 1-based index ceil(q * N). */
export function quantileNearestRank(values: Float32Array, q: number): number {
  if (values.length === 0) throw new Error("quantile of an empty sequence");
  if (!(q > 0 && q <= 1)) throw new Error(`quantile fraction must be in (0, 1], got ${q}`);
  const sorted = values.slice().sort();
  const idx = Math.min(values.length, Math.ceil(q * values.length)) - 1;
  return sorted[idx];
}

export function wordCount(values: Float32Array, level = 0.9): number {
  const threshold = quantileNearestRank(values, level);
  let count = 0;
  for (let i = 0; i < values.length; i++) {
    if (values[i] > threshold) count++;
  }
  return count;
}

export interface CountRow {
  layer: number;
  kernel: number;
  count: number;
}

export function countTable(layers: CapturedLayer[], level = 0.9): CountRow[] {
  const rows: CountRow[] = [];
  layers.forEach((layer, layerIdx) => {
    const area = layer.side * layer.side;
    for (let k = 0; k < layer.channels; k++) {
      const map = layer.values.subarray(k * area, (k + 1) * area);
      rows.push({ layer: layerIdx + 1, kernel: k, count: wordCount(map, level) });
    }
  });
  return rows;
}

export function countsCsv(rows: CountRow[]): string {
  const lines = ["layer,kernel,count"];
  for (const row of rows) {
    lines.push(`${row.layer},${row.kernel},${row.count}`);
  }
  return lines.join("\n") + "\n";
}
