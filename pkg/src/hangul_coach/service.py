"""HTTP assessment service.

POST /api/attempts runs the whole pipeline on an uploaded WAV: decode ->
canonicalize -> transcribe -> syllable diff against the catalog text ->
MFCC similarity against the catalog answer -> level + percentile, then
persists the attempt. Failed requests never touch the store.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, File, Form, HTTPException, Query, UploadFile
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import CANONICAL_RATE, audio, hangul, scoring, siamese, stt
from .corpus import Catalog, load_catalog
from .errors import HangulCoachError
from .mfcc import ClipTooShort, MfccConfig, fit_frames, mfcc


class SpanModel(BaseModel):
    text: str
    flag: str


class DiffModel(BaseModel):
    reference_spans: list[SpanModel]
    hypothesis_spans: list[SpanModel]


class AssessmentResponse(BaseModel):
    attempt_id: int
    transcript: str
    reference_text: str
    similarity: float
    level: str
    top_percent: float
    diff: DiffModel


class SentenceSummary(BaseModel):
    sentence_id: str
    text: str


class LeaderboardEntry(BaseModel):
    user_id: str
    sentence_id: str
    similarity: float
    level: str


class SttSection(BaseModel):
    backend: str = "mock"
    language_code: str = "ko-KR"
    model_name: str = "latest_short"
    api_key: str | None = None
    timeout: float = 10.0
    mock_table_path: str | None = None


class ServiceConfig(BaseModel):
    host: str = "127.0.0.1"
    port: int = 8000
    model_path: str
    corpus_dir: str
    store_path: str
    static_dir: str | None = None
    stt: SttSection = SttSection()

    @classmethod
    def from_file(cls, path) -> "ServiceConfig":
        base = Path(path).resolve().parent
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        config = cls(**raw)
        # paths in the file are relative to the file itself
        config.model_path = str(base / config.model_path)
        config.corpus_dir = str(base / config.corpus_dir)
        config.store_path = str(base / config.store_path)
        if config.static_dir is not None:
            config.static_dir = str(base / config.static_dir)
        if config.stt.mock_table_path is not None:
            config.stt.mock_table_path = str(base / config.stt.mock_table_path)
        return config


@dataclass
class Pipeline:
    """Shared immutable resources plus the single mutable attempt store."""

    catalog: Catalog
    model: siamese.SiameseModel
    transcriber: object
    store: scoring.AttemptStore
    mfcc_config: MfccConfig = MfccConfig()


def build_pipeline(config: ServiceConfig) -> Pipeline:
    return Pipeline(
        catalog=load_catalog(config.corpus_dir),
        model=siamese.load_model(config.model_path),
        transcriber=stt.make_transcriber(
            stt.SttConfig(
                backend=config.stt.backend,
                language_code=config.stt.language_code,
                model_name=config.stt.model_name,
                api_key=config.stt.api_key,
                timeout=config.stt.timeout,
                mock_table_path=config.stt.mock_table_path,
            )
        ),
        store=scoring.AttemptStore(config.store_path),
    )


def assess(pipeline: Pipeline, user_id: str, sentence_id: str, wav_bytes: bytes):
    """Full assessment; raises HTTPException with the contract's codes."""
    entry = pipeline.catalog.get(sentence_id)
    if entry is None:
        raise HTTPException(404, f"unknown sentence_id {sentence_id!r}")

    try:
        clip = audio.normalize_peak(
            audio.resample(audio.load_wav(wav_bytes), CANONICAL_RATE)
        )
    except HangulCoachError as err:
        raise HTTPException(400, f"malformed audio: {err}")

    try:
        transcript = pipeline.transcriber(clip)
    except (stt.NoSpeechRecognized, stt.FingerprintUnknown) as err:
        raise HTTPException(422, f"no speech recognized: {err}")
    except (stt.BackendUnavailable, stt.AuthFailure) as err:
        raise HTTPException(502, f"speech backend unavailable: {err}")
    except (audio.EmptyAudio, stt.ClipTooLong) as err:
        raise HTTPException(400, f"malformed audio: {err}")

    try:
        script = hangul.align(entry.text, transcript.text)
        diff = hangul.highlight(script, entry.text, transcript.text)
    except hangul.UnsupportedCharacter as err:
        raise HTTPException(422, f"transcript not alignable: {err}")

    try:
        features = fit_frames(
            mfcc(clip, pipeline.mfcc_config), siamese.INPUT_FRAMES
        )
    except ClipTooShort as err:
        raise HTTPException(400, f"malformed audio: {err}")

    score = siamese.similarity(pipeline.model, features, entry.answer_mfcc)
    level = scoring.level_of(score)

    attempt_id = scoring.record_attempt(
        pipeline.store,
        scoring.AttemptRecord(
            id=0,  # assigned by the store
            user_id=user_id,
            sentence_id=sentence_id,
            transcript=transcript.text,
            similarity=score,
            level=level,
            total_cost=script.total_cost,
            timestamp=time.time(),
        ),
    )
    percent = scoring.top_percent(score, pipeline.store.similarities())

    return AssessmentResponse(
        attempt_id=attempt_id,
        transcript=transcript.text,
        reference_text=entry.text,
        similarity=score,
        level=level.value,
        top_percent=percent,
        diff=DiffModel(**diff.to_dict()),
    )


def create_app(config: ServiceConfig) -> FastAPI:
    pipeline = build_pipeline(config)
    app = FastAPI(title="hangul-coach")

    @app.post("/api/attempts", response_model=AssessmentResponse)
    def post_attempt(
        audio: UploadFile = File(...),
        user_id: str = Form(...),
        sentence_id: str = Form(...),
    ):
        return assess(pipeline, user_id, sentence_id, audio.file.read())

    @app.get("/api/sentences", response_model=list[SentenceSummary])
    def get_sentences():
        return [
            SentenceSummary(sentence_id=e.sentence_id, text=e.text)
            for e in pipeline.catalog.entries
        ]

    @app.get("/api/leaderboard", response_model=list[LeaderboardEntry])
    def get_leaderboard(n: int = Query(10, ge=1)):
        return [
            LeaderboardEntry(
                user_id=rec.user_id,
                sentence_id=rec.sentence_id,
                similarity=rec.similarity,
                level=rec.level.value,
            )
            for rec in scoring.leaderboard(pipeline.store, n)
        ]

    @app.get("/api/health")
    def get_health():
        return {"status": "ok"}

    if config.static_dir and Path(config.static_dir).is_dir():
        app.mount(
            "/", StaticFiles(directory=config.static_dir, html=True), name="webapp"
        )
    return app
