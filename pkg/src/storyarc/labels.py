"""Psychological label inventories: 8 emotions, 5 coarse needs, 19 fine motives.

The three lists are ordered and persisted; every score vector in the system
indexes against this ordering. The combined 32-slot layout is
emotions(8) + needs(5) + motives(19).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UnknownLabel

PLUTCHIK_CANONICAL = [
    "joy", "trust", "fear", "surprise", "sadness", "disgust", "anger", "anticipation",
]

# Maslow/Reiss inventories of the annotated story corpus this pipeline targets.
MASLOW_CANONICAL = ["physiological", "stability", "love", "esteem", "spiritual growth"]

REISS_CANONICAL = [
    "status", "idealism", "power", "family", "food", "indep", "belonging",
    "competition", "honor", "romance", "savings", "contact", "health",
    "serenity", "curiosity", "approval", "rest", "tranquility", "order",
]

N_PLUTCHIK = 8
N_MASLOW = 5
N_REISS = 19
N_SLOTS = N_PLUTCHIK + N_MASLOW + N_REISS  # 32

PADDING_CHARACTER = "none"


@dataclass(frozen=True)
class PsychLabelSpace:
    plutchik_labels: tuple[str, ...] = field(default=tuple(PLUTCHIK_CANONICAL))
    maslow_labels: tuple[str, ...] = field(default=tuple(MASLOW_CANONICAL))
    reiss_labels: tuple[str, ...] = field(default=tuple(REISS_CANONICAL))

    def __post_init__(self):
        if len(self.plutchik_labels) != N_PLUTCHIK:
            raise ValueError(f"expected {N_PLUTCHIK} emotion labels, got {len(self.plutchik_labels)}")
        if len(self.maslow_labels) != N_MASLOW:
            raise ValueError(f"expected {N_MASLOW} need labels, got {len(self.maslow_labels)}")
        if len(self.reiss_labels) != N_REISS:
            raise ValueError(f"expected {N_REISS} motive labels, got {len(self.reiss_labels)}")
        for group in (self.plutchik_labels, self.maslow_labels, self.reiss_labels):
            if len(set(group)) != len(group):
                raise ValueError(f"duplicate labels in {group}")

    def plutchik_index(self, name: str) -> int:
        try:
            return self.plutchik_labels.index(name)
        except ValueError:
            raise UnknownLabel(name) from None

    def maslow_index(self, name: str) -> int:
        try:
            return self.maslow_labels.index(name)
        except ValueError:
            raise UnknownLabel(name) from None

    def reiss_index(self, name: str) -> int:
        try:
            return self.reiss_labels.index(name)
        except ValueError:
            raise UnknownLabel(name) from None

    def to_json(self) -> dict:
        return {
            "plutchik_labels": list(self.plutchik_labels),
            "maslow_labels": list(self.maslow_labels),
            "reiss_labels": list(self.reiss_labels),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PsychLabelSpace":
        return cls(
            plutchik_labels=tuple(obj["plutchik_labels"]),
            maslow_labels=tuple(obj["maslow_labels"]),
            reiss_labels=tuple(obj["reiss_labels"]),
        )


def default_label_space() -> PsychLabelSpace:
    return PsychLabelSpace()


def labels_from_annotations(stories) -> PsychLabelSpace:
    """Derive need/motive inventories from a parsed corpus, in first-appearance
    order. The emotion wheel order is fixed; counts are validated as 5 and 19."""
    maslow: list[str] = []
    reiss: list[str] = []
    for story in stories:
        for ann in story.annotations.values():
            for name in ann.maslow:
                if name not in maslow:
                    maslow.append(name)
            for name in ann.reiss:
                if name not in reiss:
                    reiss.append(name)
    return PsychLabelSpace(
        plutchik_labels=tuple(PLUTCHIK_CANONICAL),
        maslow_labels=tuple(maslow),
        reiss_labels=tuple(reiss),
    )


def state_slot_labels(labels: PsychLabelSpace) -> list[str]:
    """The stable 32-name ordering used by every per-state score vector,
    attention row and exported heatmap."""
    return list(labels.plutchik_labels) + list(labels.maslow_labels) + list(labels.reiss_labels)
