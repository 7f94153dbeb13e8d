"""Speech-to-text behind a pluggable interface.

Two backends: "google" speaks the Cloud Speech-to-Text synchronous REST
API wire format; "mock" looks the clip up by content fingerprint in a
JSON table, so the whole pipeline runs offline and deterministically.
Callers never learn which backend produced a Transcript.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
from dataclasses import dataclass, field

import httpx

from .audio import AudioClip, EmptyAudio, pcm16_bytes
from .errors import HangulCoachError

API_KEY_ENV = "HANGUL_COACH_STT_KEY"
GOOGLE_ENDPOINT = "https://speech.googleapis.com/v1/speech:recognize"
MAX_SECONDS = 60.0


class NoSpeechRecognized(HangulCoachError):
    pass


class BackendUnavailable(HangulCoachError):
    pass


class AuthFailure(HangulCoachError):
    pass


class FingerprintUnknown(HangulCoachError):
    pass


class ClipTooLong(HangulCoachError):
    pass


@dataclass(frozen=True)
class SttConfig:
    backend: str = "mock"
    language_code: str = "ko-KR"
    model_name: str = "latest_short"
    api_key: str | None = field(default=None, repr=False)  # keep out of logs
    timeout: float = 10.0
    mock_table_path: str | None = None


@dataclass(frozen=True)
class Transcript:
    text: str
    confidence: float | None = None

    def __post_init__(self):
        if not self.text:
            raise ValueError("transcript text must be non-empty")


def fingerprint(clip: AudioClip) -> str:
    """Lowercase hex SHA-256 of the clip's 16-bit LE PCM bytes."""
    return hashlib.sha256(pcm16_bytes(clip)).hexdigest()


def make_transcriber(config: SttConfig, transport: httpx.BaseTransport | None = None):
    """Build a callable clip -> Transcript for the configured backend."""
    if config.backend == "mock":
        if not config.mock_table_path:
            raise ValueError("mock backend needs mock_table_path")
        with open(config.mock_table_path, encoding="utf-8") as fh:
            table = json.load(fh)
        if not isinstance(table, dict):
            raise ValueError("mock table must be a JSON object")
        return _MockBackend(table)
    if config.backend == "google":
        key = config.api_key or os.environ.get(API_KEY_ENV, "")
        if not key:
            raise AuthFailure(
                f"google backend needs an API key ({API_KEY_ENV} or config)"
            )
        return _GoogleBackend(config, key, transport)
    raise ValueError(f"unknown STT backend {config.backend!r}")


def transcribe(clip: AudioClip, config: SttConfig) -> Transcript:
    return make_transcriber(config)(clip)


def _check_clip(clip: AudioClip) -> None:
    if len(clip.samples) == 0:
        raise EmptyAudio("cannot transcribe an empty clip")
    if clip.duration_seconds > MAX_SECONDS:
        raise ClipTooLong(
            f"{clip.duration_seconds:.1f} s exceeds the {MAX_SECONDS:.0f} s limit"
        )


class _MockBackend:
    def __init__(self, table: dict):
        self._table = dict(table)

    def __call__(self, clip: AudioClip) -> Transcript:
        _check_clip(clip)
        key = fingerprint(clip)
        if key not in self._table:
            raise FingerprintUnknown(f"no transcript for fingerprint {key[:12]}…")
        return Transcript(self._table[key])


class _GoogleBackend:
    def __init__(self, config: SttConfig, key: str, transport):
        self._config = config
        self._key = key
        self._transport = transport

    def __call__(self, clip: AudioClip) -> Transcript:
        _check_clip(clip)
        body = {
            "config": {
                "encoding": "LINEAR16",
                "sampleRateHertz": clip.sample_rate,
                "languageCode": self._config.language_code,
                "model": self._config.model_name,
            },
            "audio": {
                "content": base64.b64encode(pcm16_bytes(clip)).decode("ascii")
            },
        }
        try:
            with httpx.Client(
                timeout=self._config.timeout, transport=self._transport
            ) as client:
                response = client.post(
                    GOOGLE_ENDPOINT, params={"key": self._key}, json=body
                )
        except httpx.HTTPError as err:
            raise BackendUnavailable(f"speech API request failed: {err}") from err
        if response.status_code in (401, 403):
            raise AuthFailure("speech API rejected the key")
        if response.status_code != 200:
            raise BackendUnavailable(
                f"speech API returned HTTP {response.status_code}"
            )
        results = response.json().get("results", [])
        if not results or not results[0].get("alternatives"):
            raise NoSpeechRecognized("speech API returned no alternatives")
        top = results[0]["alternatives"][0]
        if not top.get("transcript"):
            raise NoSpeechRecognized("speech API returned an empty transcript")
        return Transcript(top["transcript"], top.get("confidence"))
