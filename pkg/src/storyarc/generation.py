"""Five-sentence story rollout under user-specified psychological arcs.

Sentence k+1 is generated from the previously generated sentences (the model
conditions on its own output, not gold text), the per-character emotion
vector for that sentence, and story-level need/motive vectors shared by all
characters. Decoding records the full per-step attention trace for export.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ag
from .corpus import (
    MAX_CONTEXT_TOKENS,
    MAX_SENT_TOKENS,
    CharArcScores,
    Vocabulary,
    detokenize,
    tokenize,
)
from .errors import ArcLengthMismatch, RequestInvalid, UnknownDecodeMode, UnknownLabel
from .labels import N_MASLOW, N_PLUTCHIK, N_REISS, PADDING_CHARACTER, state_slot_labels
from .model import AttentionTrace, ModelBundle, StepTrace, decode_step, encode, encoder_attend, psych_attend, select_character
from .pmr import pmr_encode

GENERATED_SENTENCES = 4


@dataclass
class GenerationRequest:
    first_sentence: str
    characters: list[str]
    plutchik_arcs: list[list[np.ndarray]]  # per character, 4 vectors of 8 scores
    maslow: np.ndarray                     # (5,) multi-hot, shared by all characters
    reiss: np.ndarray                      # (19,)
    decode: str = "greedy"                 # or "sample"
    temperature: float = 1.0
    seed: int = 0
    max_len: int = MAX_SENT_TOKENS

    @classmethod
    def from_json(cls, obj: dict, labels) -> "GenerationRequest":
        """Validate a wire-format request; errors carry the offending field
        path. Need/motive fields accept either label names or score vectors;
        scores are clamped into [0, 1]."""
        if not isinstance(obj, dict):
            raise RequestInvalid("request must be a JSON object", field="")
        first = obj.get("first_sentence")
        if not isinstance(first, str) or not first.strip():
            raise RequestInvalid("first_sentence must be a non-empty string", field="first_sentence")
        characters = obj.get("characters")
        if not isinstance(characters, list) or not characters or \
                not all(isinstance(c, str) and c for c in characters):
            raise RequestInvalid("characters must be a non-empty list of names", field="characters")
        if PADDING_CHARACTER in characters:
            raise RequestInvalid(f"{PADDING_CHARACTER!r} is reserved", field="characters")

        arcs_obj = obj.get("plutchik_arcs")
        if not isinstance(arcs_obj, list) or len(arcs_obj) != len(characters):
            raise ArcLengthMismatch(
                f"plutchik_arcs must hold one arc per character ({len(characters)})",
                field="plutchik_arcs")
        arcs: list[list[np.ndarray]] = []
        lengths = set()
        for ci, arc in enumerate(arcs_obj):
            path = f"plutchik_arcs[{ci}]"
            if not isinstance(arc, list) or len(arc) not in (GENERATED_SENTENCES, GENERATED_SENTENCES + 1):
                raise ArcLengthMismatch(
                    f"arc must list {GENERATED_SENTENCES} or {GENERATED_SENTENCES + 1} per-sentence vectors",
                    field=path)
            lengths.add(len(arc))
            entries = arc[-GENERATED_SENTENCES:]  # a 5th leading entry (sentence 1) is ignored
            vectors = []
            for si, vec in enumerate(entries):
                vectors.append(_score_vector(vec, N_PLUTCHIK, labels.plutchik_labels,
                                             f"{path}[{si}]"))
            arcs.append(vectors)
        if len(lengths) > 1:
            raise ArcLengthMismatch("arc lengths differ between characters", field="plutchik_arcs")

        maslow = _score_vector(obj.get("maslow", []), N_MASLOW, labels.maslow_labels, "maslow")
        reiss = _score_vector(obj.get("reiss", []), N_REISS, labels.reiss_labels, "reiss")

        decode = obj.get("decode", "greedy")
        if decode not in ("greedy", "sample"):
            raise UnknownDecodeMode(f"unknown decode mode {decode!r}", field="decode")
        temperature = float(obj.get("temperature", 1.0))
        if decode == "sample" and temperature <= 0:
            raise RequestInvalid("temperature must be positive", field="temperature")
        seed = int(obj.get("seed", 0))
        max_len = int(obj.get("max_len", MAX_SENT_TOKENS))
        if max_len <= 0:
            raise RequestInvalid("max_len must be positive", field="max_len")
        return cls(first.strip(), list(characters), arcs, maslow, reiss,
                   decode, temperature, seed, max_len)


def _score_vector(value, size: int, names, path: str) -> np.ndarray:
    """Either a list of label names (multi-hot) or a numeric score vector."""
    if isinstance(value, list) and all(isinstance(x, str) for x in value):
        vec = np.zeros(size)
        name_list = list(names)
        for name in value:
            if name not in name_list:
                raise UnknownLabel(name, field=path)
            vec[name_list.index(name)] = 1.0
        return vec
    if isinstance(value, list) and len(value) == size and \
            all(isinstance(x, (int, float)) for x in value):
        return np.clip(np.asarray(value, dtype=float), 0.0, 1.0)
    raise RequestInvalid(f"expected {size} scores or a list of label names", field=path)


@dataclass
class GeneratedStory:
    sentences: list[str]                  # 5: the input plus 4 generated
    traces: list[AttentionTrace]          # one per generated sentence
    selected_characters: list[list[str]]  # per generated sentence, per step


def generate_sentence(bundle: ModelBundle, context_ids: list[int], input_ids: list[int],
                      char_scores: list[CharArcScores], decode: str = "greedy",
                      temperature: float = 1.0, rng: np.random.Generator | None = None,
                      max_len: int = MAX_SENT_TOKENS) -> tuple[list[int], AttentionTrace]:
    """Autoregressive decoding from the start marker until the end marker or
    max_len tokens. Character selection is hard at inference time."""
    if decode not in ("greedy", "sample"):
        raise UnknownDecodeMode(f"unknown decode mode {decode!r}")
    if decode == "sample" and rng is None:
        rng = np.random.default_rng(0)
    params, config, vocab = bundle.params, bundle.config, bundle.vocab
    dtype = params["embed"].value.dtype

    enc = encode(params, config, context_ids, input_ids, dtype)
    pmr_rows, pad_mask = pmr_encode(char_scores, params, config.pmr_projection, dtype)

    h, cell = enc.h0, enc.c0
    prev_id = vocab.START
    out_ids: list[int] = []
    trace = AttentionTrace()
    for _ in range(max_len):
        y_prev = ag.reshape(ag.embedding(params["embed"], [prev_id]), (-1,))
        c_t, enc_alpha = encoder_attend(params, h, enc.states)
        gate_out = select_character(params, y_prev, h, c_t, pmr_rows, pad_mask, mode="hard_st")
        c_pmr, alpha = psych_attend(params, gate_out.s_char, h)
        h, cell, logits = decode_step(params, config, y_prev, c_pmr, c_t, h, cell, training=False)

        if decode == "greedy":
            next_id = int(np.argmax(logits.value))
        else:
            scaled = logits.value.astype(np.float64) / temperature
            scaled -= scaled.max()
            probs = np.exp(scaled)
            probs /= probs.sum()
            next_id = int(rng.choice(len(probs), p=probs))

        trace.steps.append(StepTrace(
            token_id=next_id,
            token=vocab.id_to_token[next_id],
            char_gate=gate_out.gate.value.copy(),
            selected_char=gate_out.selected,
            psy_attention=alpha.value.copy(),
            enc_attention=enc_alpha.value.copy(),
            c_pmr=c_pmr.value.copy(),
        ))
        out_ids.append(next_id)
        if next_id == vocab.END:
            break
        prev_id = next_id
    return out_ids, trace


def generate_story(bundle: ModelBundle, request: GenerationRequest) -> GeneratedStory:
    """Roll out the remaining four sentences, feeding each generated sentence
    back as the next step's input. The emotion vector for sentence k+1 comes
    from the arcs; need/motive vectors are held constant across the story."""
    config = bundle.config
    if len(request.characters) > config.max_chars:
        raise RequestInvalid(
            f"model supports at most {config.max_chars} characters", field="characters")
    for arc in request.plutchik_arcs:
        if len(arc) != GENERATED_SENTENCES:
            raise ArcLengthMismatch(
                f"need {GENERATED_SENTENCES} per-sentence entries per arc, got {len(arc)}")

    vocab = bundle.vocab
    rng = np.random.default_rng(np.random.SeedSequence(request.seed))
    sentences = [request.first_sentence]
    sentence_tokens = [tokenize(request.first_sentence)[:MAX_SENT_TOKENS]]
    traces: list[AttentionTrace] = []
    selected: list[list[str]] = []

    char_names = list(request.characters) + \
        [PADDING_CHARACTER] * (config.max_chars - len(request.characters))
    for k in range(1, GENERATED_SENTENCES + 1):
        context: list[str] = []
        for prev in sentence_tokens[: k - 1]:
            context.extend(prev)
        context = context[-MAX_CONTEXT_TOKENS:]
        scores = []
        for ci, name in enumerate(char_names):
            if name == PADDING_CHARACTER:
                scores.append(CharArcScores.padding())
            else:
                scores.append(CharArcScores(
                    name,
                    np.asarray(request.plutchik_arcs[ci][k - 1], dtype=float),
                    np.asarray(request.maslow, dtype=float),
                    np.asarray(request.reiss, dtype=float),
                ))
        out_ids, trace = generate_sentence(
            bundle, vocab.encode(context), vocab.encode(sentence_tokens[k - 1]), scores,
            decode=request.decode, temperature=request.temperature, rng=rng,
            max_len=request.max_len)
        tokens = vocab.decode_text(out_ids)
        sentences.append(detokenize(tokens) if tokens else "")
        # an empty generation (immediate end marker) still needs to feed the
        # next step's encoder
        sentence_tokens.append(tokens[:MAX_SENT_TOKENS] or [Vocabulary.SPECIALS[3]])
        traces.append(trace)
        selected.append([char_names[s.selected_char] for s in trace.steps])
    return GeneratedStory(sentences, traces, selected)


def export_attention(trace: AttentionTrace, labels) -> dict:
    """Heatmap-ready matrices: per emitted token, the 32 state-slot weights
    and the character-gate distribution, with row labels attached."""
    return {
        "tokens": trace.tokens(),
        "slot_labels": state_slot_labels(labels),
        "psy_attention": [[float(x) for x in row] for row in trace.psy_matrix()],
        "char_gate": [[float(x) for x in row] for row in trace.gate_matrix()],
    }


def story_to_json(story: GeneratedStory, request: GenerationRequest, labels) -> dict:
    slots = state_slot_labels(labels)
    return {
        "story": list(story.sentences),
        "traces": [
            {
                "tokens": t.tokens(),
                "char_gate": [[float(x) for x in row] for row in t.gate_matrix()],
                "psy_attention": [[float(x) for x in row] for row in t.psy_matrix()],
                "slot_labels": slots,
                "selected_characters": story.selected_characters[i],
            }
            for i, t in enumerate(story.traces)
        ],
        "seed": request.seed,
    }
