"""The story-continuation network.

Bidirectional recurrent encoder (two context strategies), additive attention
over encoder states, a character gate choosing whose psychological state
drives each decoding step, a state controller attending over the selected
character's 32 state slots, and an LSTM decoder consuming
[prev embedding; state context; encoder context].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ag
from .autodiff import Node
from .corpus import CharArcScores, StoryExample, Vocabulary
from .errors import AllCharactersMasked, EmptyInput, ShapeMismatch
from .labels import N_MASLOW, N_PLUTCHIK, N_REISS, PsychLabelSpace
from .pmr import pmr_encode

INIT_RANGE = 0.08
EMBED_SCALE = 0.01


# ---------------------------------------------------------------------------
# Parameters

def _uniform(rng, shape, dtype):
    return ag.Node(rng.uniform(-INIT_RANGE, INIT_RANGE, size=shape).astype(dtype))


def _normal(rng, shape, dtype):
    return ag.Node((rng.standard_normal(shape) * EMBED_SCALE).astype(dtype))


def _zeros(shape, dtype):
    return ag.Node(np.zeros(shape, dtype=dtype))


def _add_lstm(params, rng, prefix, layers, in_dim, hidden, dtype):
    for layer in range(1, layers + 1):
        d_in = in_dim if layer == 1 else 2 * hidden
        for direction in ("fwd", "bwd"):
            params[f"{prefix}_l{layer}_{direction}_W"] = _uniform(rng, (4 * hidden, d_in), dtype)
            params[f"{prefix}_l{layer}_{direction}_U"] = _uniform(rng, (4 * hidden, hidden), dtype)
            params[f"{prefix}_l{layer}_{direction}_b"] = _zeros((4 * hidden,), dtype)


def init_params(config, vocab_size: int, rng: np.random.Generator,
                dtype=np.float32, pretrained: np.ndarray | None = None) -> dict[str, Node]:
    """Build all named parameter tensors for one model configuration.

    Insertion order is deterministic and becomes the checkpoint tensor order.
    """
    E, H, C = config.emb_dim, config.hidden, config.max_chars
    D = H  # state rows live in model space = decoder hidden size
    A = H  # additive-attention width
    params: dict[str, Node] = {}

    if pretrained is not None:
        if pretrained.shape != (vocab_size, E):
            raise ShapeMismatch(f"pretrained embeddings have shape {pretrained.shape}, expected {(vocab_size, E)}")
        params["embed"] = ag.Node(pretrained.astype(dtype))
    else:
        params["embed"] = _normal(rng, (vocab_size, E), dtype)
    params["state_embed_plutchik"] = _normal(rng, (N_PLUTCHIK, E), dtype)
    params["state_embed_maslow"] = _normal(rng, (N_MASLOW, E), dtype)
    params["state_embed_reiss"] = _normal(rng, (N_REISS, E), dtype)

    if config.pmr_projection == "unified":
        params["pmr_proj_W"] = _uniform(rng, (E, D), dtype)
        params["pmr_proj_b"] = _zeros((D,), dtype)
    else:
        for group in ("plutchik", "maslow", "reiss"):
            params[f"pmr_proj_W_{group}"] = _uniform(rng, (E, D), dtype)
            params[f"pmr_proj_b_{group}"] = _zeros((D,), dtype)

    if config.context_mode == "merged":
        _add_lstm(params, rng, "enc", config.enc_layers, E, H, dtype)
        bridge_in = 2 * H
    elif config.context_mode == "independent":
        _add_lstm(params, rng, "enc_ctx", config.enc_layers, E, H, dtype)
        _add_lstm(params, rng, "enc_sent", config.enc_layers, E, H, dtype)
        bridge_in = 4 * H
    else:
        raise ValueError(f"unknown context mode {config.context_mode!r}")

    params["bridge_h_W"] = _uniform(rng, (H, bridge_in), dtype)
    params["bridge_h_b"] = _zeros((H,), dtype)
    params["bridge_c_W"] = _uniform(rng, (H, bridge_in), dtype)
    params["bridge_c_b"] = _zeros((H,), dtype)

    params["enc_att_W"] = _uniform(rng, (2 * H, A), dtype)
    params["enc_att_U"] = _uniform(rng, (A, H), dtype)
    params["enc_att_v"] = _uniform(rng, (A,), dtype)

    params["gate_W"] = _uniform(rng, (C, E + H + 2 * H), dtype)

    params["psy_att_W"] = _uniform(rng, (D, A), dtype)
    params["psy_att_U"] = _uniform(rng, (A, H), dtype)
    params["psy_att_v"] = _uniform(rng, (A,), dtype)

    params["dec_W"] = _uniform(rng, (4 * H, E + D + 2 * H), dtype)
    params["dec_U"] = _uniform(rng, (4 * H, H), dtype)
    params["dec_b"] = _zeros((4 * H,), dtype)

    params["out_W"] = _uniform(rng, (vocab_size, H), dtype)
    params["out_b"] = _zeros((vocab_size,), dtype)
    return params


def parameter_count(params: dict[str, Node]) -> int:
    return sum(p.value.size for p in params.values())


def load_word_vectors(path, vocab: Vocabulary, dim: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Read "word v1 ... v<dim>" lines; vocabulary words not present fall back
    to the random embedding init."""
    table = (rng.standard_normal((len(vocab), dim)) * EMBED_SCALE)
    wanted = vocab.token_to_id
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.rstrip().split(" ")
            if len(parts) != dim + 1:
                continue
            idx = wanted.get(parts[0])
            if idx is not None:
                table[idx] = [float(x) for x in parts[1:]]
    return table


# ---------------------------------------------------------------------------
# Recurrent cells and encoders

def lstm_step(W: Node, U: Node, b: Node, x: Node, h: Node, c: Node) -> tuple[Node, Node]:
    """One LSTM cell step; gate order in the packed preactivation is i,f,g,o."""
    H = h.value.shape[0]
    pre = ag.add(ag.add(ag.matmul(W, x), ag.matmul(U, h)), b)
    i = ag.sigmoid(ag.narrow(pre, 0, 0, H))
    f = ag.sigmoid(ag.narrow(pre, 0, H, H))
    g = ag.tanh(ag.narrow(pre, 0, 2 * H, H))
    o = ag.sigmoid(ag.narrow(pre, 0, 3 * H, H))
    c_next = ag.add(ag.mul(f, c), ag.mul(i, g))
    h_next = ag.mul(o, ag.tanh(c_next))
    return h_next, c_next


def _run_direction(params, prefix, xs: list[Node], hidden: int, dtype, reverse: bool) -> tuple[list[Node], Node]:
    W, U, b = params[f"{prefix}_W"], params[f"{prefix}_U"], params[f"{prefix}_b"]
    h = ag.tensor(np.zeros(hidden, dtype=dtype))
    c = ag.tensor(np.zeros(hidden, dtype=dtype))
    order = reversed(xs) if reverse else xs
    outs: list[Node] = []
    for x in order:
        h, c = lstm_step(W, U, b, x, h, c)
        outs.append(h)
    if reverse:
        outs.reverse()
    return outs, h


def run_bilstm(params, prefix: str, layers: int, xs: list[Node],
               hidden: int, dtype) -> tuple[list[Node], Node]:
    """Stacked bidirectional pass. Returns per-token states (width 2*hidden)
    and the concatenated final hidden states of the top layer. An empty input
    yields no token states and an all-zero final state."""
    if not xs:
        return [], ag.tensor(np.zeros(2 * hidden, dtype=dtype))
    inputs = xs
    outs: list[Node] = []
    h_fwd = h_bwd = None
    for layer in range(1, layers + 1):
        fwd, h_fwd = _run_direction(params, f"{prefix}_l{layer}_fwd", inputs, hidden, dtype, reverse=False)
        bwd, h_bwd = _run_direction(params, f"{prefix}_l{layer}_bwd", inputs, hidden, dtype, reverse=True)
        outs = [ag.concat([f, b]) for f, b in zip(fwd, bwd)]
        inputs = outs
    return outs, ag.concat([h_fwd, h_bwd])


@dataclass
class EncoderOutput:
    states: Node | None  # (L, 2H) stacked token states for attention
    h0: Node             # (H,) initial decoder hidden state
    c0: Node             # (H,) initial decoder cell state
    length: int


def _bridge(params, summary: Node) -> tuple[Node, Node]:
    h0 = ag.tanh(ag.add(ag.matmul(params["bridge_h_W"], summary), params["bridge_h_b"]))
    c0 = ag.tanh(ag.add(ag.matmul(params["bridge_c_W"], summary), params["bridge_c_b"]))
    return h0, c0


def encode_merged(params, config, context_ids: list[int], sentence_ids: list[int],
                  dtype=np.float32) -> EncoderOutput:
    """Single bidirectional pass over context + sentence concatenated."""
    ids = list(context_ids) + list(sentence_ids)
    if not ids:
        raise EmptyInput("nothing to encode")
    xs = [ag.embedding(params["embed"], [i]) for i in ids]
    xs = [ag.reshape(x, (-1,)) for x in xs]
    outs, final = run_bilstm(params, "enc", config.enc_layers, xs, config.hidden, dtype)
    h0, c0 = _bridge(params, final)
    return EncoderOutput(ag.stack(outs), h0, c0, len(ids))


def encode_independent(params, config, context_ids: list[int], sentence_ids: list[int],
                       dtype=np.float32) -> EncoderOutput:
    """Two bidirectional passes; their final states are concatenated and
    bridged into the decoder state. Attention keys come from the sentence
    encoder only."""
    if not sentence_ids:
        raise EmptyInput("sentence must be non-empty")
    ctx_xs = [ag.reshape(ag.embedding(params["embed"], [i]), (-1,)) for i in context_ids]
    sent_xs = [ag.reshape(ag.embedding(params["embed"], [i]), (-1,)) for i in sentence_ids]
    _, ctx_final = run_bilstm(params, "enc_ctx", config.enc_layers, ctx_xs, config.hidden, dtype)
    sent_outs, sent_final = run_bilstm(params, "enc_sent", config.enc_layers, sent_xs, config.hidden, dtype)
    h0, c0 = _bridge(params, ag.concat([ctx_final, sent_final]))
    return EncoderOutput(ag.stack(sent_outs), h0, c0, len(sentence_ids))


def encode(params, config, context_ids, sentence_ids, dtype=np.float32) -> EncoderOutput:
    if config.context_mode == "merged":
        return encode_merged(params, config, context_ids, sentence_ids, dtype)
    if config.context_mode == "independent":
        return encode_independent(params, config, context_ids, sentence_ids, dtype)
    raise ValueError(f"unknown context mode {config.context_mode!r}")


# ---------------------------------------------------------------------------
# Decoder-side components

def encoder_attend(params, h_prev: Node, states: Node) -> tuple[Node, Node]:
    """Additive attention over encoder token states: weights and context."""
    scores = ag.matmul(
        ag.tanh(ag.add(ag.matmul(states, params["enc_att_W"]),
                       ag.matmul(params["enc_att_U"], h_prev))),
        params["enc_att_v"],
    )
    weights = ag.softmax(scores)
    context = ag.matmul(weights, states)
    return context, weights


@dataclass
class CharacterGateOutput:
    gate: Node            # (C,) probabilities, padding slots exactly 0
    onehot: np.ndarray    # (C,) hard selection
    selected: int
    s_char: Node          # (32, d_model) selected per-state rows


def select_character(params, y_prev: Node, h_prev: Node, c_t: Node,
                     pmr_rows: list[Node], pad_mask: np.ndarray,
                     mode: str = "soft") -> CharacterGateOutput:
    """Gate over characters from [prev embedding; decoder state; encoder
    context]. Padding characters are masked to -inf before the softmax.

    soft: differentiable mixture of the characters' state rows.
    hard_st: forward uses the argmax character's rows; backward treats the
    selection as the soft mixture (straight-through).
    """
    if pad_mask.all():
        raise AllCharactersMasked("every character slot is padding")
    z = ag.concat([y_prev, h_prev, c_t])
    logits = ag.matmul(params["gate_W"], z)
    masked = ag.mask_fill(logits, pad_mask, -np.inf)
    gate = ag.softmax(masked)

    soft = None
    for i, rows in enumerate(pmr_rows):
        if pad_mask[i]:
            continue
        term = ag.mul(rows, ag.narrow(gate, 0, i, 1))
        soft = term if soft is None else ag.add(soft, term)
    selected = int(np.argmax(gate.value))
    onehot = np.zeros(len(pmr_rows), dtype=gate.value.dtype)
    onehot[selected] = 1.0

    if mode == "soft":
        s_char = soft
    elif mode == "hard_st":
        s_char = ag.straight_through(soft, pmr_rows[selected].value)
    else:
        raise ValueError(f"unknown gate mode {mode!r}")
    return CharacterGateOutput(gate, onehot, selected, s_char)


def psych_attend(params, s_char: Node, h_prev: Node) -> tuple[Node, Node]:
    """Attention over the selected character's 32 state slots; returns the
    state context vector and the slot weights."""
    scores = ag.matmul(
        ag.tanh(ag.add(ag.matmul(s_char, params["psy_att_W"]),
                       ag.matmul(params["psy_att_U"], h_prev))),
        params["psy_att_v"],
    )
    alpha = ag.softmax(scores)
    context = ag.matmul(alpha, s_char)
    return context, alpha


def decode_step(params, config, y_prev: Node, c_pmr: Node, c_t: Node,
                h_prev: Node, cell_prev: Node, training: bool = False,
                rng: np.random.Generator | None = None) -> tuple[Node, Node, Node]:
    """One decoder step on [prev embedding; state context; encoder context];
    returns next hidden/cell states and vocabulary logits."""
    x = ag.concat([y_prev, c_pmr, c_t])
    if training and config.dropout > 0:
        x = ag.dropout(x, config.dropout, training, rng)
    h, cell = lstm_step(params["dec_W"], params["dec_U"], params["dec_b"], x, h_prev, cell_prev)
    logits = ag.add(ag.matmul(params["out_W"], h), params["out_b"])
    return h, cell, logits


# ---------------------------------------------------------------------------
# Full teacher-forced pass

@dataclass
class StepTrace:
    token_id: int
    token: str
    char_gate: np.ndarray      # (C,)
    selected_char: int
    psy_attention: np.ndarray  # (32,)
    enc_attention: np.ndarray  # (L,)
    c_pmr: np.ndarray          # (d_model,)


@dataclass
class AttentionTrace:
    steps: list[StepTrace] = field(default_factory=list)

    def gate_matrix(self) -> np.ndarray:
        return np.stack([s.char_gate for s in self.steps]) if self.steps else np.zeros((0, 0))

    def psy_matrix(self) -> np.ndarray:
        return np.stack([s.psy_attention for s in self.steps]) if self.steps else np.zeros((0, 0))

    def tokens(self) -> list[str]:
        return [s.token for s in self.steps]


def forward_teacher_forced(params, config, example: StoryExample,
                           id_to_token: list[str] | None = None,
                           training: bool = False,
                           rng: np.random.Generator | None = None,
                           dtype=np.float32) -> tuple[list[Node], AttentionTrace]:
    """Run the whole network with gold previous tokens, producing one logits
    vector per target position and the per-step attention trace."""
    enc = encode(params, config, example.context_tokens, example.input_tokens, dtype)
    pmr_rows, pad_mask = pmr_encode(example.char_scores, params, config.pmr_projection, dtype)

    h, cell = enc.h0, enc.c0
    logits_steps: list[Node] = []
    trace = AttentionTrace()
    targets = example.target_tokens
    for t in range(1, len(targets)):
        y_prev = ag.reshape(ag.embedding(params["embed"], [targets[t - 1]]), (-1,))
        c_t, enc_alpha = encoder_attend(params, h, enc.states)
        gate_out = select_character(params, y_prev, h, c_t, pmr_rows, pad_mask, mode=config.gate_mode)
        c_pmr, alpha = psych_attend(params, gate_out.s_char, h)
        h, cell, logits = decode_step(params, config, y_prev, c_pmr, c_t, h, cell,
                                      training=training, rng=rng)
        logits_steps.append(logits)
        trace.steps.append(StepTrace(
            token_id=targets[t],
            token=id_to_token[targets[t]] if id_to_token else str(targets[t]),
            char_gate=gate_out.gate.value.copy(),
            selected_char=gate_out.selected,
            psy_attention=alpha.value.copy(),
            enc_attention=enc_alpha.value.copy(),
            c_pmr=c_pmr.value.copy(),
        ))
    return logits_steps, trace


@dataclass
class ModelBundle:
    """A loaded model: parameters plus everything needed to use them."""

    params: dict[str, Node]
    config: "TrainConfig"  # noqa: F821 (import cycle; see training.py)
    vocab: Vocabulary
    labels: PsychLabelSpace
