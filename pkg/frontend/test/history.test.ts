import { describe, expect, it } from "vitest";

import { HISTORY_LIMIT, loadHistory, pushEntry, replayRequest, saveHistory } from "../src/history.js";
import { buildRequest, initialState, setSlider } from "../src/state.js";
import { GenerationResponse, HistoryEntry } from "../src/types.js";

const response: GenerationResponse = { story: ["a", "b", "c", "d", "e"], traces: [], seed: 0 };

function fakeStorage() {
  const map = new Map<string, string>();
  return {
    getItem: (k: string) => map.get(k) ?? null,
    setItem: (k: string, v: string) => void map.set(k, v),
  };
}

describe("history", () => {
  it("caps at the limit, dropping the oldest", () => {
    let history: HistoryEntry[] = [];
    for (let i = 0; i < HISTORY_LIMIT + 5; i += 1) {
      history = pushEntry(history, buildRequest(initialState()), response);
    }
    expect(history).toHaveLength(HISTORY_LIMIT);
    expect(history[0].id).toBe(6); // runs 1..5 were evicted
    expect(history[history.length - 1].id).toBe(HISTORY_LIMIT + 5);
  });

  it("stores a deep copy of the request", () => {
    const state = initialState();
    const request = buildRequest(state);
    const history = pushEntry([], request, response);
    request.plutchik_arcs[0][0][0] = 0.75; // later mutation
    expect(history[0].request.plutchik_arcs[0][0][0]).toBe(0);
  });

  it("replay returns the stored request exactly", () => {
    const edited = setSlider(initialState(), 0, 1, 3, 0.6);
    const history = pushEntry([], buildRequest(edited), response);
    const replayed = replayRequest(history[0]);
    expect(replayed).toEqual(history[0].request);
    expect(replayed).not.toBe(history[0].request); // fresh copy
  });

  it("persists through storage round trips", () => {
    const storage = fakeStorage();
    const history = pushEntry([], buildRequest(initialState()), response);
    saveHistory(history, storage);
    expect(loadHistory(storage)).toEqual(history);
  });

  it("tolerates corrupt storage", () => {
    const storage = fakeStorage();
    storage.setItem("arc-console-history", "{broken");
    expect(loadHistory(storage)).toEqual([]);
  });
});
