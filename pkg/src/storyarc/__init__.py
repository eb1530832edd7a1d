"""Story continuation under per-character psychological-state arcs.

A numpy library with its own reverse-mode autodiff engine: corpus ingestion,
the gated/attentive encoder-decoder, training, generation with inspectable
attention traces, evaluation metrics, checkpointing, a CLI and an HTTP
generation service.
"""

from .corpus import (
    CharArcScores,
    RawStory,
    StoryExample,
    Vocabulary,
    aggregate_plutchik,
    build_vocab,
    cap_characters,
    detokenize,
    encode_needs,
    make_examples,
    parse_corpus,
    split_examples,
    tokenize,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .evaluation import MetricReport, acer_score, bleu, meteor_lite, rouge, train_acer
from .generation import GeneratedStory, GenerationRequest, export_attention, generate_story
from .labels import PsychLabelSpace, default_label_space, state_slot_labels
from .model import ModelBundle, forward_teacher_forced, init_params
from .training import TrainConfig, TrainReport, gradient_check, nll_loss, train

__version__ = "0.1.0"

__all__ = [
    "CharArcScores", "RawStory", "StoryExample", "Vocabulary",
    "aggregate_plutchik", "build_vocab", "cap_characters", "detokenize",
    "encode_needs", "make_examples", "parse_corpus", "split_examples", "tokenize",
    "load_checkpoint", "save_checkpoint",
    "MetricReport", "acer_score", "bleu", "meteor_lite", "rouge", "train_acer",
    "GeneratedStory", "GenerationRequest", "export_attention", "generate_story",
    "PsychLabelSpace", "default_label_space", "state_slot_labels",
    "ModelBundle", "forward_teacher_forced", "init_params",
    "TrainConfig", "TrainReport", "gradient_check", "nll_loss", "train",
]
