// Wire types mirroring the generation service's JSON API.

export type Labels = {
  plutchik_labels: string[];
  maslow_labels: string[];
  reiss_labels: string[];
};

export type GenerationRequest = {
  first_sentence: string;
  characters: string[];
  // [character][sentence 2..5][8 emotion scores in 0..1]
  plutchik_arcs: number[][][];
  maslow: string[];
  reiss: string[];
  decode: "greedy" | "sample";
  temperature: number;
  seed: number;
};

export type Trace = {
  tokens: string[];
  char_gate: number[][];      // tokens x characters
  psy_attention: number[][];  // tokens x 32 state slots
  slot_labels: string[];
  selected_characters: string[];
};

export type GenerationResponse = {
  story: string[];
  traces: Trace[];
  seed: number;
};

export type HistoryEntry = {
  id: number;
  at: string;
  request: GenerationRequest;
  response: GenerationResponse;
};

export const SENTENCES = 4; // generated sentences per story
export const EMOTIONS = 8;
export const MAX_CHARACTERS = 3;
