import json

import pytest
from fastapi.testclient import TestClient

from hangul_coach.demo import CHORES_ANSWER, CHORES_MISREAD
from hangul_coach.hangul import align, highlight
from hangul_coach.scoring import AttemptStore, Level, level_of
from hangul_coach.service import ServiceConfig, create_app
from oracles import brute_force_top_percent


@pytest.fixture()
def client(demo_dir, tmp_path):
    config = ServiceConfig(
        model_path=str(demo_dir / "model.ksnm"),
        corpus_dir=str(demo_dir / "corpus"),
        store_path=str(tmp_path / "attempts.jsonl"),
        stt={"backend": "mock", "mock_table_path": str(demo_dir / "mock_table.json")},
    )
    with TestClient(create_app(config)) as test_client:
        test_client.store_path = tmp_path / "attempts.jsonl"
        yield test_client


def post_attempt(client, demo_dir, wav_name="F2.wav", sentence_id="chores", user="u1"):
    return client.post(
        "/api/attempts",
        files={"audio": (wav_name, (demo_dir / wav_name).read_bytes(), "audio/wav")},
        data={"user_id": user, "sentence_id": sentence_id},
    )


def test_health(client):
    response = client.get("/api/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_sentences_listing(client):
    body = client.get("/api/sentences").json()
    assert [s["sentence_id"] for s in body] == ["chores", "greet", "practice"]
    assert body[0]["text"] == CHORES_ANSWER
    assert all(set(s) == {"sentence_id", "text"} for s in body)  # no audio paths


def test_assess_misread_attempt(client, demo_dir):
    response = post_attempt(client, demo_dir)
    assert response.status_code == 200
    body = response.json()

    assert body["transcript"] == CHORES_MISREAD
    assert body["reference_text"] == CHORES_ANSWER
    assert 0.0 <= body["similarity"] <= 1.0
    assert body["level"] == level_of(body["similarity"]).value
    assert body["attempt_id"] == 1
    assert body["top_percent"] == 100.0

    expected = highlight(align(CHORES_ANSWER, CHORES_MISREAD), CHORES_ANSWER, CHORES_MISREAD)
    assert body["diff"] == expected.to_dict()
    assert "".join(s["text"] for s in body["diff"]["reference_spans"]) == CHORES_ANSWER
    assert "".join(s["text"] for s in body["diff"]["hypothesis_spans"]) == CHORES_MISREAD


def test_assess_perfect_attempt_uses_answer_fingerprint(client, demo_dir):
    response = post_attempt(client, demo_dir, wav_name="F1.wav")
    assert response.status_code == 200
    body = response.json()
    assert body["transcript"] == CHORES_ANSWER
    flags = {s["flag"] for s in body["diff"]["reference_spans"]}
    assert flags == {"ok"}


def test_assess_malformed_audio_400_nothing_persisted(client):
    response = client.post(
        "/api/attempts",
        files={"audio": ("x.wav", b"not a wav", "audio/wav")},
        data={"user_id": "u1", "sentence_id": "chores"},
    )
    assert response.status_code == 400
    assert not client.store_path.exists()


def test_assess_unknown_sentence_404_nothing_persisted(client, demo_dir):
    response = post_attempt(client, demo_dir, sentence_id="nope")
    assert response.status_code == 404
    assert not client.store_path.exists()


def test_assess_unknown_clip_422_nothing_persisted(client, demo_dir, tmp_path, rng):
    from hangul_coach.audio import AudioClip, to_wav_bytes

    unknown = to_wav_bytes(AudioClip(rng.uniform(-0.5, 0.5, 16000), 16000))
    response = client.post(
        "/api/attempts",
        files={"audio": ("u.wav", unknown, "audio/wav")},
        data={"user_id": "u1", "sentence_id": "chores"},
    )
    assert response.status_code == 422
    assert not client.store_path.exists()


def test_assess_deterministic_apart_from_store_state(client, demo_dir):
    first = post_attempt(client, demo_dir).json()
    second = post_attempt(client, demo_dir).json()
    for varying in ("attempt_id", "top_percent"):
        first.pop(varying)
        second.pop(varying)
    assert first == second


def test_persisted_level_matches_similarity_and_rank_is_brute_force(client, demo_dir):
    post_attempt(client, demo_dir, wav_name="F2.wav")
    post_attempt(client, demo_dir, wav_name="F1.wav", user="u2")
    response = post_attempt(client, demo_dir, wav_name="F2.wav", user="u3")
    body = response.json()

    store = AttemptStore(client.store_path)
    records = store.load_all()
    assert len(records) == 3
    for rec in records:
        assert rec.level is level_of(rec.similarity)
    assert body["top_percent"] == brute_force_top_percent(
        records[-1].similarity, [r.similarity for r in records]
    )


def test_leaderboard_endpoint(client, demo_dir):
    assert client.get("/api/leaderboard").json() == []
    post_attempt(client, demo_dir, wav_name="F1.wav", user="ace")
    post_attempt(client, demo_dir, wav_name="F2.wav", user="try")
    body = client.get("/api/leaderboard", params={"n": 1}).json()
    assert len(body) == 1
    assert set(body[0]) == {"user_id", "sentence_id", "similarity", "level"}
    full = client.get("/api/leaderboard").json()
    sims = [row["similarity"] for row in full]
    assert sims == sorted(sims, reverse=True)
    assert client.get("/api/leaderboard", params={"n": 0}).status_code == 422


def test_missing_form_fields_rejected(client, demo_dir):
    response = client.post(
        "/api/attempts",
        files={"audio": ("F2.wav", (demo_dir / "F2.wav").read_bytes(), "audio/wav")},
        data={"user_id": "u1"},
    )
    assert response.status_code == 422
    assert not client.store_path.exists()


def test_config_from_file_resolves_relative_paths(demo_dir):
    config = ServiceConfig.from_file(demo_dir / "config.json")
    assert config.model_path == str(demo_dir / "model.ksnm")
    assert config.corpus_dir == str(demo_dir / "corpus")
    assert config.stt.mock_table_path == str(demo_dir / "mock_table.json")
    app = create_app(config)
    with TestClient(app) as test_client:
        assert test_client.get("/api/health").json() == {"status": "ok"}
