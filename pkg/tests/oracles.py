"""Independent reference implementations the fast paths are checked against.

Deliberately written the dumb way: naive matrix DFT instead of the
radix-2 FFT, explicit per-bin filter sums instead of the filterbank
matmul, double-sum DCT, exact-fraction edit-distance enumeration, and
plain counting for ranks. Nothing here shares code with the package
beyond dataclass inputs.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

from hangul_coach.mfcc import MfccConfig


def naive_dft(x: np.ndarray) -> np.ndarray:
    """O(N^2) DFT by direct evaluation of the transform matrix."""
    n = len(x)
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ np.asarray(x, dtype=complex)


def naive_power_spectrum(frame: np.ndarray, fft_size: int) -> np.ndarray:
    padded = np.concatenate([frame, np.zeros(fft_size - len(frame))])
    spectrum = naive_dft(padded)
    return (spectrum.real**2 + spectrum.imag**2)[: fft_size // 2 + 1] / fft_size


def direct_dct2(x, n_keep: int | None = None) -> np.ndarray:
    """Orthonormal DCT-II as an explicit double sum."""
    n = len(x)
    n_keep = n if n_keep is None else n_keep
    out = []
    for j in range(n_keep):
        scale = np.sqrt(1.0 / n) if j == 0 else np.sqrt(2.0 / n)
        total = 0.0
        for i in range(n):
            total += x[i] * np.cos(np.pi * j * (2 * i + 1) / (2 * n))
        out.append(scale * total)
    return np.array(out)


def naive_mfcc(samples, sample_rate: int, cfg: MfccConfig) -> np.ndarray:
    """The whole pipeline re-derived step by step."""
    x = np.asarray(samples, dtype=np.float64)
    emphasized = np.concatenate(
        [[x[0]], [x[i] - cfg.pre_emphasis * x[i - 1] for i in range(1, len(x))]]
    )
    n_frames = 1 + (len(x) - cfg.frame_len) // cfg.hop
    window = 0.54 - 0.46 * np.cos(
        2 * np.pi * np.arange(cfg.frame_len) / (cfg.frame_len - 1)
    )

    fmax = sample_rate / 2 if cfg.fmax is None else cfg.fmax
    mels = np.linspace(
        2595 * np.log10(1 + cfg.fmin / 700),
        2595 * np.log10(1 + fmax / 700),
        cfg.n_mels + 2,
    )
    bins = np.round(
        700 * (10 ** (mels / 2595) - 1) * cfg.fft_size / sample_rate
    ).astype(int)
    n_bins = cfg.fft_size // 2 + 1

    rows = []
    for t in range(n_frames):
        frame = emphasized[t * cfg.hop : t * cfg.hop + cfg.frame_len] * window
        power = naive_power_spectrum(frame, cfg.fft_size)
        feats = []
        for j in range(cfg.n_mels):
            lo, center, hi = bins[j], bins[j + 1], bins[j + 2]
            energy = 0.0
            for b in range(max(lo, 0), min(hi, n_bins - 1) + 1):
                if b <= center:
                    weight = (b - lo) / (center - lo)
                else:
                    weight = (hi - b) / (hi - center)
                if weight > 0:
                    energy += weight * power[b]
            feats.append(np.log(max(energy, cfg.log_floor)))
        rows.append(direct_dct2(feats, cfg.n_coeffs))
    out = np.array(rows)
    if cfg.apply_cmn:
        out = out - out.mean(axis=0)
    return out


def _thirds(a: str, b: str) -> int:
    oa, ob = ord(a) - 0xAC00, ord(b) - 0xAC00
    return (
        (oa // 588 != ob // 588)
        + (oa % 588 // 28 != ob % 588 // 28)
        + (oa % 28 != ob % 28)
    )


def exhaustive_min_cost(ref: str, hyp: str) -> Fraction:
    """Exact minimum alignment cost by enumerating every edit script.

    Exponential; fine for the short property-test strings.
    """
    @lru_cache(maxsize=None)
    def best(i: int, j: int) -> Fraction:
        if i == len(ref) and j == len(hyp):
            return Fraction(0)
        options = []
        if i < len(ref) and j < len(hyp):
            options.append(Fraction(_thirds(ref[i], hyp[j]), 3) + best(i + 1, j + 1))
        if i < len(ref):
            options.append(Fraction(1) + best(i + 1, j))
        if j < len(hyp):
            options.append(Fraction(1) + best(i, j + 1))
        return min(options)

    return best(0, 0)


def dp_table_min_cost(ref: str, hyp: str) -> Fraction:
    """Full DP table over exact fractions; independent of the package's
    integer-thirds implementation and its backtrace."""
    n, m = len(ref), len(hyp)
    table = [[Fraction(0)] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        table[i][0] = Fraction(i)
    for j in range(1, m + 1):
        table[0][j] = Fraction(j)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            table[i][j] = min(
                table[i - 1][j - 1] + Fraction(_thirds(ref[i - 1], hyp[j - 1]), 3),
                table[i - 1][j] + 1,
                table[i][j - 1] + 1,
            )
    return table[n][m]


def brute_force_top_percent(score: float, population) -> float:
    """Count-and-round, written independently of scoring.top_percent."""
    population = list(population)
    count = 0
    for s in population:
        if s >= score:
            count += 1
    return round(count * 100.0 / len(population), 1)
