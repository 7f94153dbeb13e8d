"""Deterministic synthetic fixtures: a tiny demo corpus for the service
and a two-class toy training set.

Real learner recordings are not redistributable, so demo "voices" are
tone sequences derived from each syllable's jamo indices: distinct,
reproducible audio per sentence that exercises the full pipeline. Run
`python -m hangul_coach.demo DIR` and serve DIR/config.json.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from . import CANONICAL_RATE
from .audio import AudioClip, load_wav, normalize_peak, resample, to_wav_bytes
from .hangul import decompose
from .siamese import init_model, save_model
from .stt import fingerprint

CHORES_ANSWER = "둘 다 청소하기 싫어 귀찮아"
CHORES_MISREAD = "요일 날 여기다 청소하기 싫어 귀찮아"

DEMO_SENTENCES = [
    ("chores", CHORES_ANSWER),
    ("greet", "안녕하세요"),
    ("practice", "한국어 발음 연습"),
]

_SYLLABLE_SECONDS = 0.18
_GAP_SECONDS = 0.06


def sentence_voice(text: str, seed: int = 0, sample_rate: int = CANONICAL_RATE) -> AudioClip:
    """Tone-sequence 'voice': one pitch per syllable, silence per space."""
    rng = np.random.default_rng(seed)
    pieces = []
    for ch in text:
        if ch == " ":
            pieces.append(np.zeros(int(_GAP_SECONDS * sample_rate)))
            continue
        s = decompose(ch)
        f0 = 150.0 + 18.0 * s.lead + 6.0 * s.vowel + 3.0 * s.tail
        f0 *= 1.0 + rng.uniform(-0.01, 0.01)
        n = int(_SYLLABLE_SECONDS * sample_rate)
        t = np.arange(n) / sample_rate
        envelope = np.minimum(1.0, np.minimum(t, t[::-1]) / 0.02)
        tone = 0.4 * np.sin(2 * np.pi * f0 * t) + 0.15 * np.sin(
            2 * np.pi * 2 * f0 * t + rng.uniform(0, 2 * np.pi)
        )
        pieces.append(tone * envelope)
    samples = np.concatenate(pieces) if pieces else np.zeros(sample_rate // 10)
    samples = samples + rng.normal(0.0, 0.003, len(samples))
    return AudioClip(np.clip(samples, -1.0, 1.0), sample_rate)


def tone_burst(
    freq: float, seed: int, seconds: float = 1.0, sample_rate: int = CANONICAL_RATE
) -> AudioClip:
    """One jittered tone burst; the unit of the toy training classes."""
    rng = np.random.default_rng(seed)
    f = freq * (1.0 + rng.uniform(-0.02, 0.02))
    amp = rng.uniform(0.3, 0.6)
    phase = rng.uniform(0, 2 * np.pi)
    n = int(seconds * sample_rate)
    t = np.arange(n) / sample_rate
    envelope = np.minimum(1.0, np.minimum(t, t[::-1]) / 0.02)
    samples = amp * np.sin(2 * np.pi * f * t + phase) * envelope
    samples = samples + rng.normal(0.0, 0.004, n)
    return AudioClip(np.clip(samples, -1.0, 1.0), sample_rate)


def _canonical(clip: AudioClip) -> AudioClip:
    return normalize_peak(resample(clip, CANONICAL_RATE))


def build_demo(dest, static_dir: str | None = None, model_seed: int = 7) -> Path:
    """Write corpus/, user clips F1/F2, mock table, model, and config."""
    dest = Path(dest)
    corpus_dir = dest / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)

    table = {}
    manifest = []
    for i, (sentence_id, text) in enumerate(DEMO_SENTENCES):
        wav = to_wav_bytes(sentence_voice(text, seed=100 + i))
        (corpus_dir / f"{sentence_id}.wav").write_bytes(wav)
        manifest.append(
            {"sentence_id": sentence_id, "text": text, "audio": f"{sentence_id}.wav"}
        )
        table[fingerprint(_canonical(load_wav(wav)))] = text
    (corpus_dir / "sentences.json").write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2), encoding="utf-8"
    )

    # F1: a good attempt at the chores sentence; F2: the misread one
    clips = {"F1": (CHORES_ANSWER, 200), "F2": (CHORES_MISREAD, 201)}
    for name, (text, seed) in clips.items():
        wav = to_wav_bytes(sentence_voice(text, seed=seed))
        (dest / f"{name}.wav").write_bytes(wav)
        table[fingerprint(_canonical(load_wav(wav)))] = text
    (dest / "mock_table.json").write_text(
        json.dumps(table, ensure_ascii=False, indent=2), encoding="utf-8"
    )

    save_model(init_model(model_seed), dest / "model.ksnm")

    config = {
        "host": "127.0.0.1",
        "port": 8000,
        "model_path": "model.ksnm",
        "corpus_dir": "corpus",
        "store_path": "attempts.jsonl",
        "static_dir": static_dir,
        "stt": {"backend": "mock", "mock_table_path": "mock_table.json"},
    }
    (dest / "config.json").write_text(json.dumps(config, indent=2), encoding="utf-8")
    return dest


def build_toy_training(dest, n_per_class: int = 40, seed: int = 1000) -> Path:
    """Two-class toy set: 440 Hz vs 880 Hz bursts, with pairs.json.

    Positives pair consecutive same-class examples (both classes),
    negatives pair across classes: n_per_class positives + n_per_class
    negatives, balanced.
    """
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    names = {}
    for label, freq in (("a", 440.0), ("b", 880.0)):
        for i in range(n_per_class):
            name = f"{label}_{i:03d}.wav"
            clip = tone_burst(freq, seed=seed + (0 if label == "a" else 5000) + i)
            (dest / name).write_bytes(to_wav_bytes(clip))
            names.setdefault(label, []).append(name)

    pairs = []
    for cls in ("a", "b"):
        for i in range(0, n_per_class, 2):
            pairs.append(
                {"a": names[cls][i], "b": names[cls][(i + 1) % n_per_class], "label": 1}
            )
    for i in range(n_per_class):
        pairs.append({"a": names["a"][i], "b": names["b"][i], "label": 0})
    (dest / "pairs.json").write_text(json.dumps(pairs, indent=2), encoding="utf-8")
    return dest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m hangul_coach.demo",
        description="generate demo fixtures",
    )
    parser.add_argument("dir", help="destination directory")
    parser.add_argument(
        "--toy", action="store_true", help="build the toy training set instead"
    )
    parser.add_argument("--static", default=None, help="static dir for the web UI")
    args = parser.parse_args(argv)
    if args.toy:
        build_toy_training(args.dir)
    else:
        build_demo(args.dir, static_dir=args.static)
    print(f"wrote {args.dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
