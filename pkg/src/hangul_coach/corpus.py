"""Reference sentence catalog.

A corpus directory holds `sentences.json`, an array of objects with
exactly the fields sentence_id, text, audio (relative WAV path), plus
the referenced native "answer" recordings. Loading canonicalizes each
recording and precomputes its network-ready MFCC matrix, so the request
path never touches audio files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import CANONICAL_RATE
from .audio import load_wav, normalize_peak, resample
from .errors import HangulCoachError
from .hangul import tokenize
from .mfcc import MfccConfig, MfccMatrix, fit_frames, mfcc
from .siamese import INPUT_FRAMES


class MissingManifest(HangulCoachError):
    pass


class MissingAudio(HangulCoachError):
    pass


class DuplicateId(HangulCoachError):
    pass


@dataclass(frozen=True)
class ReferenceEntry:
    sentence_id: str
    text: str
    answer_audio_path: Path
    answer_mfcc: MfccMatrix


@dataclass(frozen=True)
class Catalog:
    entries: tuple[ReferenceEntry, ...]  # manifest order

    def __len__(self):
        return len(self.entries)

    def get(self, sentence_id: str) -> ReferenceEntry | None:
        return next(
            (e for e in self.entries if e.sentence_id == sentence_id), None
        )


def load_catalog(directory, config: MfccConfig = MfccConfig()) -> Catalog:
    directory = Path(directory)
    manifest_path = directory / "sentences.json"
    if not manifest_path.is_file():
        raise MissingManifest(f"no sentences.json in {directory}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)

    entries = []
    seen = set()
    for item in manifest:
        sentence_id = item["sentence_id"]
        if sentence_id in seen:
            raise DuplicateId(sentence_id)
        seen.add(sentence_id)
        tokenize(item["text"])  # reject bad catalog text at load, not per request
        audio_path = directory / item["audio"]
        if not audio_path.is_file():
            raise MissingAudio(sentence_id)
        clip = normalize_peak(
            resample(load_wav(audio_path.read_bytes()), CANONICAL_RATE)
        )
        matrix = fit_frames(mfcc(clip, config), INPUT_FRAMES)
        entries.append(
            ReferenceEntry(sentence_id, item["text"], audio_path, matrix)
        )
    return Catalog(tuple(entries))
