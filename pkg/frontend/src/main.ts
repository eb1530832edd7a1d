// DOM wiring for the arc console. All model math lives behind the HTTP API;
// this file only renders state and responses.

import { ApiError, fetchLabels, generate } from "./api.js";
import { alignStories, describePath, diffRequests } from "./diff.js";
import { HeatmapData, dims, gateHeatmap, stateHeatmap } from "./heatmap.js";
import {
  HISTORY_LIMIT,
  loadHistory,
  pushEntry,
  replayRequest,
  saveHistory,
} from "./history.js";
import {
  EditorState,
  addCharacter,
  buildRequest,
  initialState,
  removeCharacter,
  setSlider,
  toggleNeed,
} from "./state.js";
import { GenerationRequest, HistoryEntry, Labels, SENTENCES } from "./types.js";

const BASE = (window as unknown as { SERVICE_URL?: string }).SERVICE_URL
  ?? `${location.protocol}//${location.hostname}:8765`;

let labels: Labels;
let state: EditorState = initialState();
let history: HistoryEntry[] = [];
let pending = false;
let compareSelection: number[] = [];

const $ = (id: string) => document.getElementById(id) as HTMLElement;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

// ---------------------------------------------------------------------------
// editor rendering

function sliderId(c: number, s: number, e: number): string {
  return `slider-${c}-${s}-${e}`;
}

function renderEditor(): void {
  const root = $("characters");
  root.replaceChildren();
  state.characters.forEach((row, c) => {
    const section = el("div", "character");
    const head = el("div", "character-head");
    head.appendChild(el("strong", undefined, row.name));
    if (state.characters.length > 1) {
      const remove = el("button", "small", "remove");
      remove.addEventListener("click", () => {
        state = removeCharacter(state, c);
        renderEditor();
      });
      head.appendChild(remove);
    }
    section.appendChild(head);
    for (let s = 0; s < SENTENCES; s += 1) {
      const group = el("div", "sentence-group");
      group.appendChild(el("span", "sentence-label", `sentence ${s + 2}`));
      labels.plutchik_labels.forEach((emotion, e) => {
        const wrap = el("label", "slider");
        wrap.title = emotion;
        wrap.appendChild(el("span", "emotion", emotion.slice(0, 4)));
        const input = el("input");
        input.type = "range";
        input.min = "0";
        input.max = "1";
        input.step = "0.05";
        input.id = sliderId(c, s, e);
        input.value = String(row.arc[s][e]);
        input.addEventListener("input", () => {
          state = setSlider(state, c, s, e, Number(input.value));
          value.textContent = Number(input.value).toFixed(2);
        });
        const value = el("span", "value", row.arc[s][e].toFixed(2));
        wrap.appendChild(input);
        wrap.appendChild(value);
        group.appendChild(wrap);
      });
      section.appendChild(group);
    }
    root.appendChild(section);
  });

  renderNeeds("maslow", labels.maslow_labels);
  renderNeeds("reiss", labels.reiss_labels);
}

function renderNeeds(group: "maslow" | "reiss", names: string[]): void {
  const root = $(group);
  root.replaceChildren();
  names.forEach((name) => {
    const wrap = el("label", "need");
    const box = el("input");
    box.type = "checkbox";
    box.checked = state[group].includes(name);
    box.addEventListener("change", () => {
      state = toggleNeed(state, group, name);
    });
    wrap.appendChild(box);
    wrap.appendChild(el("span", undefined, name));
    root.appendChild(wrap);
  });
}

// ---------------------------------------------------------------------------
// results rendering

function drawHeatmap(canvas: HTMLCanvasElement, data: HeatmapData): void {
  const { rows, cols } = dims(data);
  const cell = 14;
  const left = 90;
  const top = 64;
  canvas.width = left + cols * cell + 4;
  canvas.height = top + rows * cell + 4;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.font = "10px sans-serif";
  ctx.fillStyle = "#222";
  data.colLabels.forEach((label, j) => {
    ctx.save();
    ctx.translate(left + j * cell + cell / 2 + 3, top - 6);
    ctx.rotate(-Math.PI / 3);
    ctx.fillText(label.slice(0, 10), 0, 0);
    ctx.restore();
  });
  data.rowLabels.forEach((label, i) => {
    ctx.fillStyle = "#222";
    ctx.fillText(label.slice(0, 13), 2, top + i * cell + cell - 3);
  });
  for (let i = 0; i < rows; i += 1) {
    for (let j = 0; j < cols; j += 1) {
      ctx.fillStyle = data.colors[i][j];
      ctx.fillRect(left + j * cell, top + i * cell, cell - 1, cell - 1);
    }
  }
}

function renderEntry(entry: HistoryEntry): void {
  const root = $("result");
  root.replaceChildren();
  root.appendChild(el("h3", undefined, `run ${entry.id}`));
  const storyBox = el("div", "story");
  entry.response.story.forEach((sentence, i) => {
    storyBox.appendChild(el("p", i === 0 ? "seed-sentence" : undefined, sentence));
  });
  root.appendChild(storyBox);

  entry.response.traces.forEach((trace, i) => {
    const section = el("details", "trace");
    if (i === 0) section.open = true;
    section.appendChild(el("summary", undefined,
      `sentence ${i + 2}: character gate + state attention`));
    const gate = el("canvas");
    drawHeatmap(gate as HTMLCanvasElement, gateHeatmap(trace, entry.request.characters));
    section.appendChild(gate);
    const psy = el("canvas");
    drawHeatmap(psy as HTMLCanvasElement, stateHeatmap(trace));
    section.appendChild(psy);
    root.appendChild(section);
  });
}

// ---------------------------------------------------------------------------
// history + compare

function renderHistory(): void {
  const root = $("history");
  root.replaceChildren();
  [...history].reverse().forEach((entry) => {
    const row = el("div", "history-row");
    const pick = el("input");
    pick.type = "checkbox";
    pick.checked = compareSelection.includes(entry.id);
    pick.addEventListener("change", () => {
      compareSelection = pick.checked
        ? [...compareSelection, entry.id]
        : compareSelection.filter((id) => id !== entry.id);
      renderCompare();
    });
    row.appendChild(pick);
    row.appendChild(el("span", "history-label",
      `#${entry.id} ${entry.response.story[1]?.slice(0, 42) ?? ""}`));
    const show = el("button", "small", "show");
    show.addEventListener("click", () => renderEntry(entry));
    row.appendChild(show);
    const replay = el("button", "small", "replay");
    replay.addEventListener("click", () => void runGeneration(replayRequest(entry)));
    row.appendChild(replay);
    root.appendChild(row);
  });
  $("history-count").textContent = `${history.length}/${HISTORY_LIMIT}`;
}

function renderCompare(): void {
  const root = $("compare");
  root.replaceChildren();
  const chosen = compareSelection
    .map((id) => history.find((e) => e.id === id))
    .filter((e): e is HistoryEntry => !!e);
  if (chosen.length < 2) return;

  const table = el("table", "compare-table");
  const headRow = el("tr");
  chosen.forEach((entry) => headRow.appendChild(el("th", undefined, `run ${entry.id}`)));
  table.appendChild(headRow);
  alignStories(chosen.map((e) => e.response.story)).forEach((aligned) => {
    const tr = el("tr", aligned.same ? undefined : "differs");
    aligned.cells.forEach((cell) => tr.appendChild(el("td", undefined, cell)));
    table.appendChild(tr);
  });
  root.appendChild(table);

  const base = chosen[0];
  chosen.slice(1).forEach((entry) => {
    const paths = diffRequests(base.request, entry.request);
    const line = paths.length
      ? paths.map((p) => describePath(p, base.request.characters, labels.plutchik_labels)).join("; ")
      : "identical requests";
    root.appendChild(el("p", "diff-line", `run ${base.id} vs ${entry.id}: ${line}`));
  });
}

// ---------------------------------------------------------------------------
// generation flow

function setBanner(message: string | null, retry?: () => void): void {
  const banner = $("banner");
  banner.replaceChildren();
  if (!message) {
    banner.classList.add("hidden");
    return;
  }
  banner.classList.remove("hidden");
  banner.appendChild(el("span", undefined, message));
  if (retry) {
    const button = el("button", "small", "retry");
    button.addEventListener("click", retry);
    banner.appendChild(button);
  }
}

function markFieldError(field: string | undefined, message: string): void {
  setBanner(null);
  const target = field?.match(/^plutchik_arcs\[(\d+)\]\[(\d+)\]\[(\d+)\]$/);
  const note = `${field ?? "request"}: ${message}`;
  if (target) {
    const input = document.getElementById(sliderId(+target[1], +target[2], +target[3]));
    input?.classList.add("field-error");
  } else if (field && document.getElementById(`control-${field}`)) {
    $(`control-${field}`).classList.add("field-error");
  }
  $("field-errors").textContent = note;
}

function clearFieldErrors(): void {
  document.querySelectorAll(".field-error").forEach((n) => n.classList.remove("field-error"));
  $("field-errors").textContent = "";
}

async function runGeneration(request: GenerationRequest): Promise<void> {
  if (pending) return;
  pending = true;
  clearFieldErrors();
  const button = $("generate") as HTMLButtonElement;
  button.disabled = true;
  try {
    const response = await generate(BASE, request);
    history = pushEntry(history, request, response);
    saveHistory(history, localStorage);
    renderHistory();
    renderEntry(history[history.length - 1]);
  } catch (error) {
    if (error instanceof ApiError && error.status === 422) {
      markFieldError(error.field, `${error.code}: ${error.message}`);
    } else {
      const message = error instanceof Error ? error.message : String(error);
      setBanner(`generation failed: ${message}`, () => void runGeneration(request));
    }
  } finally {
    pending = false;
    button.disabled = false;
  }
}

// ---------------------------------------------------------------------------
// boot

async function boot(): Promise<void> {
  try {
    labels = await fetchLabels(BASE);
  } catch (error) {
    const message = error instanceof Error ? error.message : String(error);
    setBanner(`cannot reach service at ${BASE}: ${message}`, () => void boot());
    return;
  }
  setBanner(null);
  history = loadHistory(localStorage);
  renderEditor();
  renderHistory();

  ($("first-sentence") as HTMLInputElement).value = state.firstSentence;
  $("first-sentence").addEventListener("input", (ev) => {
    state = { ...state, firstSentence: (ev.target as HTMLInputElement).value };
  });
  $("decode").addEventListener("change", (ev) => {
    state = { ...state, decode: (ev.target as HTMLSelectElement).value as "greedy" | "sample" };
  });
  $("temperature").addEventListener("input", (ev) => {
    state = { ...state, temperature: Number((ev.target as HTMLInputElement).value) || 1.0 };
  });
  $("seed").addEventListener("input", (ev) => {
    state = { ...state, seed: Number((ev.target as HTMLInputElement).value) || 0 };
  });
  $("add-character").addEventListener("click", () => {
    const input = $("new-character") as HTMLInputElement;
    state = addCharacter(state, input.value);
    input.value = "";
    renderEditor();
  });
  $("generate").addEventListener("click", () => void runGeneration(buildRequest(state)));
}

void boot();
