"""Per-character psychological state representation.

Each of a character's 32 state slots (8 emotions + 5 needs + 19 motives) is
embedded, scaled by its annotated score and projected into model space:

    row(i, s) = W @ (score[i, s] * v_s) + b

Rows are kept per state (not summed per character) so the decoder-side
controller can attend over individual states; summing the rows recovers the
collapsed per-character form. The projection is either one shared (W, b) or
one per indicator group, selected by config.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ag
from .autodiff import Node
from .corpus import CharArcScores
from .errors import ShapeMismatch
from .labels import N_MASLOW, N_PLUTCHIK, N_REISS

# start offsets of the three indicator groups in the 32-slot layout
GROUP_SLICES = {
    "plutchik": (0, N_PLUTCHIK),
    "maslow": (N_PLUTCHIK, N_MASLOW),
    "reiss": (N_PLUTCHIK + N_MASLOW, N_REISS),
}


def state_embedding_matrix(params: dict[str, Node]) -> Node:
    """The (32, emb) table of state embeddings in slot order."""
    return ag.concat(
        [params["state_embed_plutchik"], params["state_embed_maslow"], params["state_embed_reiss"]],
        axis=0,
    )


def pmr_encode(char_scores: list[CharArcScores], params: dict[str, Node],
               projection: str = "unified", dtype=np.float32) -> tuple[list[Node], np.ndarray]:
    """Encode every character's scores into per-state rows.

    Returns one (32, d_model) node per character plus the boolean padding
    mask (True where the slot holds the reserved padding character).
    """
    table = state_embedding_matrix(params)
    n_slots = table.value.shape[0]
    rows_per_char: list[Node] = []
    for cs in char_scores:
        scores = cs.slot_vector().astype(dtype)
        if scores.shape[0] != n_slots:
            raise ShapeMismatch(f"expected {n_slots} state scores, got {scores.shape[0]}")
        scaled = ag.mul(table, ag.tensor(scores[:, None], dtype=dtype))
        if projection == "unified":
            rows = ag.add(ag.matmul(scaled, params["pmr_proj_W"]), params["pmr_proj_b"])
        elif projection == "per_indicator":
            parts = []
            for group, (start, length) in GROUP_SLICES.items():
                block = ag.narrow(scaled, 0, start, length)
                parts.append(ag.add(
                    ag.matmul(block, params[f"pmr_proj_W_{group}"]),
                    params[f"pmr_proj_b_{group}"],
                ))
            rows = ag.concat(parts, axis=0)
        else:
            raise ValueError(f"unknown projection mode {projection!r}")
        rows_per_char.append(rows)
    pad_mask = np.array([cs.is_padding() for cs in char_scores], dtype=bool)
    return rows_per_char, pad_mask
