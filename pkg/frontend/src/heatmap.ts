// Heatmap data preparation: the display convention is rows = state slots (or
// characters for the gate strip), columns = generated tokens, brightness
// rising with attention weight on a linear white-to-saturated scale.

import { Trace } from "./types.js";

// white -> saturated blue
const TARGET = { r: 13, g: 71, b: 161 };

export function valueToColor(value: number): string {
  const v = Math.min(1, Math.max(0, value));
  const r = Math.round(255 - v * (255 - TARGET.r));
  const g = Math.round(255 - v * (255 - TARGET.g));
  const b = Math.round(255 - v * (255 - TARGET.b));
  return `rgb(${r},${g},${b})`;
}

export type HeatmapData = {
  rowLabels: string[];
  colLabels: string[];
  values: number[][]; // rows x cols
  colors: string[][];
};

function transpose(matrix: number[][]): number[][] {
  if (matrix.length === 0) return [];
  return matrix[0].map((_, j) => matrix.map((row) => row[j]));
}

export function stateHeatmap(trace: Trace): HeatmapData {
  const values = transpose(trace.psy_attention);
  return {
    rowLabels: trace.slot_labels,
    colLabels: trace.tokens,
    values,
    colors: values.map((row) => row.map(valueToColor)),
  };
}

export function gateHeatmap(trace: Trace, characters: string[]): HeatmapData {
  const values = transpose(trace.char_gate);
  return {
    rowLabels: values.map((_, i) => characters[i] ?? "(padding)"),
    colLabels: trace.tokens,
    values,
    colors: values.map((row) => row.map(valueToColor)),
  };
}

export function dims(data: HeatmapData): { rows: number; cols: number } {
  const rows = data.values.length;
  const cols = rows ? data.values[0].length : 0;
  if (data.values.some((row) => row.length !== cols)) {
    throw new Error("ragged heatmap matrix");
  }
  return { rows, cols };
}
