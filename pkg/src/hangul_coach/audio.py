"""WAV ingestion and canonicalization.

Everything downstream works on AudioClip: mono float64 samples in
[-1, 1] at a known rate. Only RIFF/WAVE PCM 16-bit LE files (1 or 2
channels) are accepted; stereo is downmixed by averaging.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import HangulCoachError


class MalformedContainer(HangulCoachError):
    """Bytes are not a well-formed RIFF/WAVE container."""


class UnsupportedFormat(HangulCoachError):
    """Container is valid but not PCM 16-bit with 1 or 2 channels."""


class EmptyAudio(HangulCoachError):
    """File decodes to zero samples."""


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray  # float64, each value in [-1, 1]
    sample_rate: int

    def __post_init__(self):
        object.__setattr__(
            self, "samples", np.asarray(self.samples, dtype=np.float64)
        )
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.samples.size and float(np.max(np.abs(self.samples))) > 1.0:
            raise ValueError("samples must lie in [-1.0, 1.0]")

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate


def load_wav(data: bytes) -> AudioClip:
    """Parse a RIFF/WAVE container holding 16-bit PCM.

    Walks the chunk list, so extra chunks (LIST, fact, ...) are fine.
    16-bit integers map to floats by dividing by 32768, which keeps
    -32768 -> -1.0 exact.
    """
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedContainer("not a RIFF/WAVE container")

    fmt = None
    frames = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise MalformedContainer(f"chunk {cid!r} truncated")
        if cid == b"fmt ":
            if size < 16:
                raise MalformedContainer("fmt chunk too small")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            frames = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None or frames is None:
        raise MalformedContainer("missing fmt or data chunk")

    audio_format, channels, sample_rate, _, block_align, bits = fmt
    if audio_format != 1:
        raise UnsupportedFormat(f"format code {audio_format}, expected PCM (1)")
    if bits != 16:
        raise UnsupportedFormat(f"{bits}-bit samples, expected 16")
    if channels not in (1, 2):
        raise UnsupportedFormat(f"{channels} channels, expected 1 or 2")
    if sample_rate <= 0:
        raise MalformedContainer("non-positive sample rate")
    if block_align != 2 * channels:
        raise MalformedContainer("block alignment inconsistent with format")
    if len(frames) % block_align != 0:
        raise MalformedContainer("data chunk holds a partial frame")
    if len(frames) == 0:
        raise EmptyAudio("zero samples")

    ints = np.frombuffer(frames, dtype="<i2").astype(np.float64)
    if channels == 2:
        ints = ints.reshape(-1, 2).mean(axis=1)
    return AudioClip(ints / 32768.0, sample_rate)


def to_wav_bytes(clip: AudioClip) -> bytes:
    """Serialize a clip to canonical mono 16-bit PCM WAV."""
    pcm = pcm16_bytes(clip)
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(pcm),
        b"WAVE",
        b"fmt ",
        16,
        1,  # PCM
        1,  # mono
        clip.sample_rate,
        clip.sample_rate * 2,
        2,
        16,
        b"data",
        len(pcm),
    )
    return header + pcm


def pcm16_bytes(clip: AudioClip) -> bytes:
    """Quantize to 16-bit LE PCM (round to nearest, clipped at full scale)."""
    ints = np.clip(np.round(clip.samples * 32768.0), -32768, 32767)
    return ints.astype("<i2").tobytes()


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Linear-interpolation resample to target_rate.

    Output length is round(n * target/source); source positions past the
    last sample clamp to it. Equal rates reproduce the input samples
    exactly.
    """
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    n = len(clip.samples)
    out_len = round(n * target_rate / clip.sample_rate)
    if out_len == 0 or n == 0:
        return AudioClip(np.zeros(0), target_rate)
    pos = np.arange(out_len) * (clip.sample_rate / target_rate)
    pos = np.minimum(pos, n - 1)
    lo = pos.astype(np.intp)
    hi = np.minimum(lo + 1, n - 1)
    frac = pos - lo
    out = clip.samples[lo] * (1.0 - frac) + clip.samples[hi] * frac
    return AudioClip(np.clip(out, -1.0, 1.0), target_rate)


def normalize_peak(clip: AudioClip) -> AudioClip:
    """Scale so the largest |sample| is exactly 0.95; silence unchanged.

    Dividing by the peak first makes the peak land on 0.95 exactly, so a
    second application is a no-op.
    """
    if len(clip.samples) == 0:
        return clip
    peak = float(np.max(np.abs(clip.samples)))
    if peak == 0.0 or peak == 0.95:
        return clip
    return AudioClip((clip.samples / peak) * 0.95, clip.sample_rate)
