// Topic heatmap: rows are selected topics, columns are terms in the exact
// order the server sent them, and one shared scale covers every cell.

import { HeatmapResponse } from "../types.js";

export interface HeatmapCell {
  value: number;
  /** value / max over the whole matrix, for a single shared color scale. */
  intensity: number;
}

export interface HeatmapModel {
  /** "model/topic" per row, in response order. */
  rowLabels: string[];
  /** Terms in server order (decreasing average relevance). */
  columnLabels: string[];
  cells: HeatmapCell[][];
  maxValue: number;
}

export function buildHeatmap(payload: HeatmapResponse): HeatmapModel {
  let maxValue = 0;
  for (const row of payload.rows) {
    for (const value of row.values) {
      if (value > maxValue) {
        maxValue = value;
      }
    }
  }
  const cells = payload.rows.map((row) =>
    row.values.map((value): HeatmapCell => {
      return { value, intensity: maxValue > 0 ? value / maxValue : 0 };
    }),
  );
  return {
    rowLabels: payload.rows.map((r) => `${r.model_index}/${r.topic_index}`),
    columnLabels: [...payload.terms],
    cells,
    maxValue,
  };
}
