// Field-level request diffs (for highlighting what changed between runs) and
// sentence alignment for the side-by-side story view.

import { GenerationRequest } from "./types.js";

export function diffRequests(a: GenerationRequest, b: GenerationRequest): string[] {
  const paths: string[] = [];
  if (a.first_sentence !== b.first_sentence) paths.push("first_sentence");
  if (a.decode !== b.decode) paths.push("decode");
  if (a.temperature !== b.temperature) paths.push("temperature");
  if (a.seed !== b.seed) paths.push("seed");
  if (JSON.stringify(a.characters) !== JSON.stringify(b.characters)) paths.push("characters");
  for (const group of ["maslow", "reiss"] as const) {
    const left = [...a[group]].sort();
    const right = [...b[group]].sort();
    if (JSON.stringify(left) !== JSON.stringify(right)) paths.push(group);
  }
  const chars = Math.max(a.plutchik_arcs.length, b.plutchik_arcs.length);
  for (let c = 0; c < chars; c += 1) {
    const arcA = a.plutchik_arcs[c];
    const arcB = b.plutchik_arcs[c];
    if (!arcA || !arcB) {
      paths.push(`plutchik_arcs[${c}]`);
      continue;
    }
    for (let s = 0; s < Math.max(arcA.length, arcB.length); s += 1) {
      const rowA = arcA[s] ?? [];
      const rowB = arcB[s] ?? [];
      for (let e = 0; e < Math.max(rowA.length, rowB.length); e += 1) {
        if (rowA[e] !== rowB[e]) paths.push(`plutchik_arcs[${c}][${s}][${e}]`);
      }
    }
  }
  return paths;
}

export type AlignedRow = {
  cells: string[];
  same: boolean;
};

export function alignStories(stories: string[][]): AlignedRow[] {
  const depth = Math.max(...stories.map((s) => s.length), 0);
  const rows: AlignedRow[] = [];
  for (let i = 0; i < depth; i += 1) {
    const cells = stories.map((s) => s[i] ?? "");
    rows.push({ cells, same: cells.every((c) => c === cells[0]) });
  }
  return rows;
}

// Human-readable control label for a diff path, used by the compare view to
// name highlighted sliders (e.g. "plutchik_arcs[0][2][4]" -> "tom, sentence 4,
// sadness" given the label inventory and character list).
export function describePath(
  path: string,
  characters: string[],
  plutchikLabels: string[],
): string {
  const arc = path.match(/^plutchik_arcs\[(\d+)\]\[(\d+)\]\[(\d+)\]$/);
  if (arc) {
    const [, c, s, e] = arc;
    const name = characters[Number(c)] ?? `character ${c}`;
    const emotion = plutchikLabels[Number(e)] ?? `emotion ${e}`;
    return `${name}, sentence ${Number(s) + 2}, ${emotion}`;
  }
  return path;
}
