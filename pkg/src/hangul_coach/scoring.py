"""Fluency levels, percentile rank, and the append-only attempt store.

Only the 0.9 NativeLike boundary is fixed contractually (strictly
"higher than"); the lower band edges default to 0.75 and 0.5 but can be
overridden. The store is a UTF-8 JSON-lines file, one attempt per line.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, replace
from enum import Enum

from .errors import HangulCoachError

NATIVE_LIKE_THRESHOLD = 0.9  # immutable: strictly greater than


class OutOfRange(HangulCoachError):
    pass


class EmptyPopulation(HangulCoachError):
    pass


class StorageFailure(HangulCoachError):
    pass


class Level(str, Enum):
    NATIVE_LIKE = "NativeLike"
    ADVANCED = "Advanced"
    INTERMEDIATE = "Intermediate"
    BEGINNER = "Beginner"


def level_of(
    score: float, *, advanced: float = 0.75, intermediate: float = 0.5
) -> Level:
    """Band a similarity score. The 0.9 boundary itself is Advanced."""
    if not 0.0 <= score <= 1.0:
        raise OutOfRange(f"score {score} outside [0, 1]")
    if not 0.0 <= intermediate < advanced <= NATIVE_LIKE_THRESHOLD:
        raise ValueError("need 0 <= intermediate < advanced <= 0.9")
    if score > NATIVE_LIKE_THRESHOLD:
        return Level.NATIVE_LIKE
    if score > advanced:
        return Level.ADVANCED
    if score > intermediate:
        return Level.INTERMEDIATE
    return Level.BEGINNER


def top_percent(score: float, population) -> float:
    """Share of stored scores at or above this one, as a percentage
    rounded to one decimal. The caller records the attempt first, so the
    population always contains the queried score."""
    population = list(population)
    if not population:
        raise EmptyPopulation("no recorded attempts")
    at_or_above = sum(1 for s in population if s >= score)
    return round(100.0 * at_or_above / len(population), 1)


_FIELDS = (
    "id",
    "user_id",
    "sentence_id",
    "transcript",
    "similarity",
    "level",
    "total_cost",
    "timestamp",
)


@dataclass(frozen=True)
class AttemptRecord:
    id: int
    user_id: str
    sentence_id: str
    transcript: str
    similarity: float
    level: Level
    total_cost: float
    timestamp: float  # UTC seconds

    def __post_init__(self):
        if not 0.0 <= self.similarity <= 1.0:
            raise OutOfRange(f"similarity {self.similarity} outside [0, 1]")

    def to_json(self) -> str:
        row = {name: getattr(self, name) for name in _FIELDS}
        row["level"] = self.level.value
        return json.dumps(row, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "AttemptRecord":
        row = json.loads(line)
        row["level"] = Level(row["level"])
        return cls(**{name: row[name] for name in _FIELDS})


class AttemptStore:
    """Append-only JSON-lines store. Writes are serialized; reads take a
    snapshot of the file."""

    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()

    def load_all(self) -> list[AttemptRecord]:
        try:
            with open(self.path, encoding="utf-8") as fh:
                return [AttemptRecord.from_json(line) for line in fh if line.strip()]
        except FileNotFoundError:
            return []
        except OSError as err:
            raise StorageFailure(f"cannot read {self.path}: {err}") from err

    def similarities(self) -> list[float]:
        return [rec.similarity for rec in self.load_all()]


def record_attempt(store: AttemptStore, record: AttemptRecord) -> int:
    """Append with the next sequential id; the line is flushed and fsynced
    before returning. Timestamps are clamped to stay non-decreasing."""
    with store._lock:
        existing = store.load_all()
        assigned = replace(record, id=len(existing) + 1)
        if existing and assigned.timestamp < existing[-1].timestamp:
            assigned = replace(assigned, timestamp=existing[-1].timestamp)
        try:
            with open(store.path, "a", encoding="utf-8") as fh:
                fh.write(assigned.to_json() + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as err:
            raise StorageFailure(f"cannot append to {store.path}: {err}") from err
        return assigned.id


def leaderboard(
    store: AttemptStore, n: int, sentence_id: str | None = None
) -> list[AttemptRecord]:
    """Top n by similarity, ties broken by earlier timestamp then id."""
    if n < 1:
        raise ValueError("n must be >= 1")
    records = store.load_all()
    if sentence_id is not None:
        records = [rec for rec in records if rec.sentence_id == sentence_id]
    ranked = sorted(records, key=lambda rec: (-rec.similarity, rec.timestamp, rec.id))
    return ranked[:n]
