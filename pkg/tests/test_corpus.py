import json

import numpy as np
import pytest

from hangul_coach.audio import to_wav_bytes
from hangul_coach.corpus import (
    DuplicateId,
    MissingAudio,
    MissingManifest,
    load_catalog,
)
from hangul_coach.demo import sentence_voice
from hangul_coach.hangul import UnsupportedCharacter


def write_corpus(path, entries):
    path.mkdir(parents=True, exist_ok=True)
    manifest = []
    for sentence_id, text in entries:
        name = f"{sentence_id}.wav"
        (path / name).write_bytes(to_wav_bytes(sentence_voice(text, seed=1)))
        manifest.append({"sentence_id": sentence_id, "text": text, "audio": name})
    (path / "sentences.json").write_text(
        json.dumps(manifest, ensure_ascii=False), encoding="utf-8"
    )
    return manifest


def test_load_catalog(tmp_path):
    write_corpus(tmp_path / "corpus", [("one", "안녕하세요")])
    catalog = load_catalog(tmp_path / "corpus")
    assert len(catalog) == 1
    entry = catalog.get("one")
    assert entry.text == "안녕하세요"
    assert entry.answer_mfcc.values.shape == (200, 13)
    assert catalog.get("nope") is None


def test_load_catalog_missing_manifest(tmp_path):
    with pytest.raises(MissingManifest):
        load_catalog(tmp_path)


def test_load_catalog_missing_audio(tmp_path):
    corpus = tmp_path / "corpus"
    write_corpus(corpus, [("one", "안녕하세요")])
    (corpus / "one.wav").unlink()
    with pytest.raises(MissingAudio) as err:
        load_catalog(corpus)
    assert "one" in str(err.value)


def test_load_catalog_duplicate_id(tmp_path):
    corpus = tmp_path / "corpus"
    manifest = write_corpus(corpus, [("one", "안녕하세요")])
    manifest.append(manifest[0])
    (corpus / "sentences.json").write_text(
        json.dumps(manifest, ensure_ascii=False), encoding="utf-8"
    )
    with pytest.raises(DuplicateId):
        load_catalog(corpus)


def test_load_catalog_rejects_bad_text_at_load(tmp_path):
    corpus = tmp_path / "corpus"
    manifest = write_corpus(corpus, [("one", "안녕하세요")])
    manifest[0]["text"] = "hello 안녕"
    (corpus / "sentences.json").write_text(
        json.dumps(manifest, ensure_ascii=False), encoding="utf-8"
    )
    with pytest.raises(UnsupportedCharacter):
        load_catalog(corpus)


def test_load_catalog_deterministic(tmp_path):
    corpus = tmp_path / "corpus"
    write_corpus(corpus, [("one", "안녕하세요"), ("two", "한국어 발음 연습")])
    first = load_catalog(corpus)
    second = load_catalog(corpus)
    assert [e.sentence_id for e in first.entries] == ["one", "two"]
    for e1, e2 in zip(first.entries, second.entries):
        assert np.array_equal(e1.answer_mfcc.values, e2.answer_mfcc.values)
