"""Error types shared across the library.

Every error carries a stable machine-readable ``code`` (the class name) so the
CLI and the HTTP service can report failures uniformly.
"""

from __future__ import annotations


class StoryArcError(Exception):
    """Base class; ``code`` is stable across releases."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field

    @property
    def code(self) -> str:
        return type(self).__name__


# corpus
class MalformedRecord(StoryArcError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownLabel(StoryArcError):
    def __init__(self, name: str, field: str | None = None):
        super().__init__(f"unknown label {name!r}", field=field)
        self.name = name


class WrongSentenceCount(StoryArcError):
    def __init__(self, story_id: str, count: int):
        super().__init__(f"story {story_id!r} has {count} sentences, expected 5")
        self.story_id = story_id


class EmptyCorpus(StoryArcError):
    pass


class ClassifierUnavailable(StoryArcError):
    pass


# numerics
class ShapeMismatch(StoryArcError):
    pass


class NonFiniteValue(StoryArcError):
    pass


class NotScalarLoss(StoryArcError):
    pass


# model
class EmptyInput(StoryArcError):
    pass


class AllCharactersMasked(StoryArcError):
    pass


# training
class LengthMismatch(StoryArcError):
    pass


class EmptyTarget(StoryArcError):
    pass


class DivergedLoss(StoryArcError):
    pass


class EmptyDataset(StoryArcError):
    pass


# generation / service
class ModelNotLoaded(StoryArcError):
    pass


class UnknownDecodeMode(StoryArcError):
    pass


class ArcLengthMismatch(StoryArcError):
    pass


class RequestInvalid(StoryArcError):
    pass


# evaluation
class NoEvaluablePairs(StoryArcError):
    pass
