"""MFCC feature extraction.

Pipeline: pre-emphasis -> Hamming-windowed frames -> power spectrum via
an in-repo radix-2 FFT -> triangular mel filterbank -> natural log with
a floor -> orthonormal DCT-II -> optional cepstral mean normalization.

All arithmetic is double precision so the naive-oracle tolerances in the
test suite (1e-9) are meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .audio import AudioClip
from .errors import HangulCoachError


class ClipTooShort(HangulCoachError):
    """Fewer samples than one analysis frame."""


class DegenerateFilter(HangulCoachError):
    """Two adjacent mel break frequencies snapped to the same FFT bin."""


@dataclass(frozen=True)
class MfccConfig:
    frame_len: int = 400  # 25 ms at 16 kHz
    hop: int = 160  # 10 ms
    fft_size: int = 512
    n_mels: int = 26
    n_coeffs: int = 13
    pre_emphasis: float = 0.97
    fmin: float = 0.0
    fmax: float | None = None  # None -> sample_rate / 2
    log_floor: float = 1e-10
    apply_cmn: bool = True

    def __post_init__(self):
        if self.fft_size < 1 or self.fft_size & (self.fft_size - 1):
            raise ValueError("fft_size must be a power of two")
        if self.fft_size < self.frame_len:
            raise ValueError("fft_size must be >= frame_len")
        if not 0 < self.n_coeffs <= self.n_mels:
            raise ValueError("need 0 < n_coeffs <= n_mels")
        if not 0.0 <= self.pre_emphasis < 1.0:
            raise ValueError("pre_emphasis must be in [0, 1)")

    def fmax_for(self, sample_rate: int) -> float:
        fmax = sample_rate / 2 if self.fmax is None else self.fmax
        if not 0 <= self.fmin < fmax <= sample_rate / 2:
            raise ValueError("need 0 <= fmin < fmax <= sample_rate/2")
        return fmax


@dataclass(frozen=True)
class MfccMatrix:
    values: np.ndarray  # (frames, coeffs) float64
    frame_hop_seconds: float

    def __post_init__(self):
        object.__setattr__(
            self, "values", np.asarray(self.values, dtype=np.float64)
        )
        if self.values.ndim != 2:
            raise ValueError("values must be a 2-D matrix")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")


def pre_emphasize(samples: np.ndarray, alpha: float) -> np.ndarray:
    """y[0] = x[0]; y[n] = x[n] - alpha*x[n-1]."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must be in [0, 1)")
    x = np.asarray(samples, dtype=np.float64)
    y = x.copy()
    y[1:] -= alpha * x[:-1]
    return y


def frame_and_window(samples: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """Slice into full frames at offsets 0, hop, 2*hop, ... and apply a
    Hamming window. Returns a (frames, frame_len) matrix."""
    x = np.asarray(samples, dtype=np.float64)
    if len(x) < frame_len:
        raise ClipTooShort(f"{len(x)} samples < frame_len {frame_len}")
    n_frames = 1 + (len(x) - frame_len) // hop
    idx = np.arange(frame_len) + hop * np.arange(n_frames)[:, None]
    return x[idx] * hamming_window(frame_len)


def hamming_window(n: int) -> np.ndarray:
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * np.arange(n) / (n - 1))


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    rev = np.zeros(n, dtype=np.intp)
    for i in range(1, n):
        rev[i] = (rev[i >> 1] >> 1) | ((i & 1) << (bits - 1))
    return rev


def fft_radix2(frames: np.ndarray) -> np.ndarray:
    """Iterative radix-2 decimation-in-time FFT along the last axis.

    Accepts any leading batch shape; the last axis length must be a
    power of two.
    """
    x = np.asarray(frames, dtype=np.complex128)
    n = x.shape[-1]
    if n < 1 or n & (n - 1):
        raise ValueError("FFT length must be a power of two")
    lead = x.shape[:-1]
    y = np.ascontiguousarray(x[..., _bit_reverse_indices(n)]).reshape(-1, n)
    m = 2
    while m <= n:
        half = m // 2
        tw = np.exp(-2j * np.pi * np.arange(half) / m)
        blocks = y.reshape(-1, n // m, m)
        u = blocks[:, :, :half].copy()
        t = blocks[:, :, half:] * tw
        blocks[:, :, :half] = u + t
        blocks[:, :, half:] = u - t
        m *= 2
    return y.reshape(lead + (n,))


def power_spectrum(frame: np.ndarray, fft_size: int) -> np.ndarray:
    """One-sided power spectrum: P[k] = |X[k]|^2 / fft_size for
    k = 0..fft_size/2, after zero-padding the frame to fft_size."""
    x = np.asarray(frame, dtype=np.float64)
    if x.shape[-1] > fft_size:
        raise ValueError("frame longer than fft_size")
    pad = fft_size - x.shape[-1]
    if pad:
        x = np.concatenate(
            [x, np.zeros(x.shape[:-1] + (pad,))], axis=-1
        )
    spec = fft_radix2(x)[..., : fft_size // 2 + 1]
    return (spec.real**2 + spec.imag**2) / fft_size


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(
    n_mels: int, fft_size: int, sample_rate: int, fmin: float, fmax: float
) -> np.ndarray:
    """Triangular filters on a (n_mels, fft_size/2 + 1) matrix.

    Break frequencies are n_mels + 2 points equally spaced in mel between
    fmin and fmax, snapped to the nearest FFT bin center. Each filter
    rises linearly to 1.0 at its center bin and falls to 0 at its right
    break.
    """
    mels = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2)
    bins = np.round(mel_to_hz(mels) * fft_size / sample_rate).astype(int)
    for i in range(n_mels + 1):
        if bins[i] == bins[i + 1]:
            raise DegenerateFilter(
                f"breaks {i} and {i + 1} both snap to bin {bins[i]}; "
                "fft_size too small for n_mels"
            )
    n_bins = fft_size // 2 + 1
    fb = np.zeros((n_mels, n_bins))
    k = np.arange(n_bins)
    for j in range(n_mels):
        left, center, right = bins[j], bins[j + 1], bins[j + 2]
        up = (k - left) / (center - left)
        down = (right - k) / (right - center)
        fb[j] = np.clip(np.minimum(up, down), 0.0, None)
    return fb


def dct2_ortho(vector: np.ndarray) -> np.ndarray:
    """Orthonormal DCT-II along the last axis."""
    x = np.asarray(vector, dtype=np.float64)
    return x @ dct2_basis(x.shape[-1]).T


def dct2_basis(n: int) -> np.ndarray:
    """(n, n) matrix whose rows are the orthonormal DCT-II basis."""
    i = np.arange(n)
    basis = np.cos(np.pi * np.outer(i, 2 * i + 1) / (2 * n))
    basis *= np.sqrt(2.0 / n)
    basis[0] = np.sqrt(1.0 / n)
    return basis


def mfcc(clip: AudioClip, config: MfccConfig = MfccConfig()) -> MfccMatrix:
    """Run the full pipeline on a clip at its own sample rate."""
    fmax = config.fmax_for(clip.sample_rate)
    emphasized = pre_emphasize(clip.samples, config.pre_emphasis)
    frames = frame_and_window(emphasized, config.frame_len, config.hop)
    power = power_spectrum(frames, config.fft_size)
    fb = mel_filterbank(
        config.n_mels, config.fft_size, clip.sample_rate, config.fmin, fmax
    )
    energies = power @ fb.T
    logged = np.log(np.maximum(energies, config.log_floor))
    coeffs = (logged @ dct2_basis(config.n_mels).T)[:, : config.n_coeffs]
    if config.apply_cmn:
        coeffs = coeffs - coeffs.mean(axis=0)
    return MfccMatrix(coeffs, config.hop / clip.sample_rate)


def fit_frames(m: MfccMatrix, target_frames: int) -> MfccMatrix:
    """Truncate or zero-pad along the frame axis to exactly target_frames."""
    if target_frames <= 0:
        raise ValueError("target_frames must be positive")
    t, c = m.values.shape
    if t == target_frames:
        return m
    if t > target_frames:
        return replace(m, values=m.values[:target_frames])
    padded = np.zeros((target_frames, c))
    padded[:t] = m.values
    return replace(m, values=padded)
