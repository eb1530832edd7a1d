// Editor state and the request assembled from it. Slider edits clamp into
// [0, 1] and arcs are always 4 sentences x 8 emotions by construction, so
// any request this module builds passes the service's schema validation.

import { EMOTIONS, GenerationRequest, MAX_CHARACTERS, SENTENCES } from "./types.js";

export type CharacterRow = {
  name: string;
  arc: number[][]; // SENTENCES x EMOTIONS
};

export type EditorState = {
  firstSentence: string;
  characters: CharacterRow[];
  maslow: string[];
  reiss: string[];
  decode: "greedy" | "sample";
  temperature: number;
  seed: number;
};

export function emptyArc(): number[][] {
  return Array.from({ length: SENTENCES }, () => new Array<number>(EMOTIONS).fill(0));
}

export function initialState(): EditorState {
  return {
    firstSentence: "tom found a ball .",
    characters: [{ name: "tom", arc: emptyArc() }],
    maslow: [],
    reiss: [],
    decode: "greedy",
    temperature: 1.0,
    seed: 0,
  };
}

export function clamp01(value: number): number {
  if (Number.isNaN(value)) return 0;
  return Math.min(1, Math.max(0, value));
}

export function setSlider(
  state: EditorState,
  charIdx: number,
  sentenceIdx: number,
  emotionIdx: number,
  value: number,
): EditorState {
  const characters = state.characters.map((row, c) => {
    if (c !== charIdx) return row;
    const arc = row.arc.map((sentence, s) =>
      s === sentenceIdx
        ? sentence.map((v, e) => (e === emotionIdx ? clamp01(value) : v))
        : sentence,
    );
    return { ...row, arc };
  });
  return { ...state, characters };
}

export function addCharacter(state: EditorState, name: string): EditorState {
  if (state.characters.length >= MAX_CHARACTERS) return state;
  const trimmed = name.trim();
  if (!trimmed || state.characters.some((c) => c.name === trimmed)) return state;
  return { ...state, characters: [...state.characters, { name: trimmed, arc: emptyArc() }] };
}

export function removeCharacter(state: EditorState, charIdx: number): EditorState {
  if (state.characters.length <= 1) return state;
  return { ...state, characters: state.characters.filter((_, i) => i !== charIdx) };
}

export function renameCharacter(state: EditorState, charIdx: number, name: string): EditorState {
  const trimmed = name.trim();
  if (!trimmed) return state;
  return {
    ...state,
    characters: state.characters.map((row, i) => (i === charIdx ? { ...row, name: trimmed } : row)),
  };
}

export function toggleNeed(state: EditorState, group: "maslow" | "reiss", label: string): EditorState {
  const current = state[group];
  const next = current.includes(label)
    ? current.filter((l) => l !== label)
    : [...current, label];
  return { ...state, [group]: next };
}

export function buildRequest(state: EditorState): GenerationRequest {
  return {
    first_sentence: state.firstSentence.trim(),
    characters: state.characters.map((c) => c.name),
    plutchik_arcs: state.characters.map((c) =>
      c.arc.map((sentence) => sentence.map(clamp01)),
    ),
    maslow: [...state.maslow],
    reiss: [...state.reiss],
    decode: state.decode,
    temperature: state.temperature,
    seed: state.seed,
  };
}
