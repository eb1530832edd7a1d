import { describe, expect, it } from "vitest";

import { alignStories, describePath, diffRequests } from "../src/diff.js";
import { addCharacter, buildRequest, initialState, setSlider, toggleNeed } from "../src/state.js";

describe("request diffs", () => {
  it("an entry compared to itself has no differences", () => {
    const request = buildRequest(initialState());
    expect(diffRequests(request, request)).toEqual([]);
  });

  it("a single slider edit yields exactly one path", () => {
    const base = initialState();
    const a = buildRequest(setSlider(base, 0, 2, 2, 1.0));
    const b = buildRequest(setSlider(base, 0, 2, 2, 0.0));
    expect(diffRequests(a, b)).toEqual(["plutchik_arcs[0][2][2]"]);
  });

  it("fear edits across sentences touch only fear paths", () => {
    const fearIdx = 2; // canonical emotion order
    let a = initialState();
    let b = initialState();
    for (let s = 0; s < 4; s += 1) b = setSlider(b, 0, s, fearIdx, 1.0);
    const paths = diffRequests(buildRequest(a), buildRequest(b));
    expect(paths).toHaveLength(4);
    for (const p of paths) expect(p).toMatch(/^plutchik_arcs\[0\]\[\d\]\[2\]$/);
  });

  it("need toggles and scalar fields are reported by name", () => {
    const a = buildRequest(initialState());
    let edited = toggleNeed(initialState(), "maslow", "love");
    edited = { ...edited, seed: 7 };
    const paths = diffRequests(a, buildRequest(edited));
    expect(paths.sort()).toEqual(["maslow", "seed"]);
  });

  it("character list changes are one coarse path", () => {
    const a = buildRequest(initialState());
    const b = buildRequest(addCharacter(initialState(), "dad"));
    const paths = diffRequests(a, b);
    expect(paths).toContain("characters");
    expect(paths).toContain("plutchik_arcs[1]");
  });
});

describe("path description", () => {
  it("names the character, sentence and emotion", () => {
    const labels = ["joy", "trust", "fear", "surprise", "sadness", "disgust", "anger", "anticipation"];
    expect(describePath("plutchik_arcs[0][2][4]", ["tom"], labels))
      .toBe("tom, sentence 4, sadness");
    expect(describePath("seed", ["tom"], labels)).toBe("seed");
  });
});

describe("story alignment", () => {
  it("marks rows that differ and pads shorter stories", () => {
    const rows = alignStories([
      ["s1", "same", "left only"],
      ["s1", "changed"],
    ]);
    expect(rows).toHaveLength(3);
    expect(rows[0].same).toBe(true);
    expect(rows[1].same).toBe(false);
    expect(rows[2].cells).toEqual(["left only", ""]);
  });

  it("three-way compare produces one cell per story", () => {
    const rows = alignStories([["a"], ["a"], ["a"]]);
    expect(rows[0].cells).toHaveLength(3);
    expect(rows[0].same).toBe(true);
  });
});
