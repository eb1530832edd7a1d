// Bounded run history with pluggable persistence (localStorage in the
// browser, anything with getItem/setItem in tests).

import { GenerationRequest, GenerationResponse, HistoryEntry } from "./types.js";

export const HISTORY_LIMIT = 20;
const STORAGE_KEY = "arc-console-history";

export type StorageLike = {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
};

export function pushEntry(
  history: HistoryEntry[],
  request: GenerationRequest,
  response: GenerationResponse,
  now: () => string = () => new Date().toISOString(),
): HistoryEntry[] {
  const nextId = history.length ? Math.max(...history.map((e) => e.id)) + 1 : 1;
  const entry: HistoryEntry = {
    id: nextId,
    at: now(),
    // deep-copied so later slider edits cannot mutate stored requests
    request: JSON.parse(JSON.stringify(request)),
    response,
  };
  const out = [...history, entry];
  return out.length > HISTORY_LIMIT ? out.slice(out.length - HISTORY_LIMIT) : out;
}

export function replayRequest(entry: HistoryEntry): GenerationRequest {
  // an exact copy of the stored request, byte-for-byte re-sendable
  return JSON.parse(JSON.stringify(entry.request));
}

export function saveHistory(history: HistoryEntry[], storage: StorageLike): void {
  storage.setItem(STORAGE_KEY, JSON.stringify(history));
}

export function loadHistory(storage: StorageLike): HistoryEntry[] {
  const raw = storage.getItem(STORAGE_KEY);
  if (!raw) return [];
  try {
    const parsed = JSON.parse(raw);
    return Array.isArray(parsed) ? (parsed as HistoryEntry[]) : [];
  } catch {
    return [];
  }
}
