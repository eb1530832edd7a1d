import { describe, expect, it } from "vitest";

import { dims, gateHeatmap, stateHeatmap, valueToColor } from "../src/heatmap.js";
import { Trace } from "../src/types.js";

const trace: Trace = {
  tokens: ["she", "was", "glad"],
  char_gate: [
    [1, 0, 0],
    [0.6, 0.4, 0],
    [0.2, 0.8, 0],
  ],
  psy_attention: [
    new Array(32).fill(1 / 32),
    new Array(32).fill(1 / 32),
    new Array(32).fill(1 / 32),
  ],
  slot_labels: Array.from({ length: 32 }, (_, i) => `slot${i}`),
  selected_characters: ["tom", "tom", "dad"],
};

describe("color scale", () => {
  it("is white at 0 and saturated at 1, clamping outside", () => {
    expect(valueToColor(0)).toBe("rgb(255,255,255)");
    expect(valueToColor(1)).toBe("rgb(13,71,161)");
    expect(valueToColor(-3)).toBe(valueToColor(0));
    expect(valueToColor(9)).toBe(valueToColor(1));
  });

  it("is monotone: more attention, darker channel", () => {
    const extract = (c: string) => Number(c.match(/rgb\((\d+),/)![1]);
    expect(extract(valueToColor(0.2))).toBeGreaterThan(extract(valueToColor(0.8)));
  });
});

describe("heatmap layout", () => {
  it("state heatmap rows are the 32 slots, columns the tokens", () => {
    const data = stateHeatmap(trace);
    expect(dims(data)).toEqual({ rows: 32, cols: 3 });
    expect(data.rowLabels).toHaveLength(32);
    expect(data.colLabels).toEqual(["she", "was", "glad"]);
    expect(data.colors).toHaveLength(32);
  });

  it("gate heatmap rows are the characters", () => {
    const data = gateHeatmap(trace, ["tom", "dad"]);
    expect(dims(data)).toEqual({ rows: 3, cols: 3 });
    expect(data.rowLabels).toEqual(["tom", "dad", "(padding)"]);
    expect(data.values[0]).toEqual([1, 0.6, 0.2]); // transposed
  });

  it("rejects ragged matrices", () => {
    const bad = stateHeatmap(trace);
    bad.values[1] = bad.values[1].slice(0, 2);
    expect(() => dims(bad)).toThrow(/ragged/);
  });
});
