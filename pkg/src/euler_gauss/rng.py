"""Counter-based Gaussian coefficients g_n = r_n + i s_n on the upper half lattice.

Each sample index owns an independent Philox stream keyed by (seed, index).
Within a stream, mode n in Z^2_+ = {n1 > 0, or n1 = 0 and n2 > 0} consumes
the two 64-bit words at position 2 rank(n), where the rank orders modes by
square shell max(|n1|, |n2|) and then lexicographically. A mode therefore
gets the same draw whatever the support, truncation, batch split or thread
count. Uniforms are mapped to normals by the inverse CDF.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy.special import ndtri

from .lattice import CoefficientSequence, Mode, SequenceError, SpectralField

__all__ = [
    "SamplerConfig",
    "upper_half_rank",
    "gaussian_pairs",
    "sample",
    "sample_coeffs",
]

_MASK64 = (1 << 64) - 1


def _shell_start(k: int) -> int:
    # Z^2_+ modes with 0 < max(|n1|, |n2|) < k
    return 2 * (k - 1) * k


@lru_cache(maxsize=64)
def _shell_modes(k: int) -> dict[tuple[int, int], int]:
    pts = []
    for i in range(0, k + 1):
        for j in range(-k, k + 1):
            if max(abs(i), abs(j)) != k:
                continue
            if i > 0 or (i == 0 and j > 0):
                pts.append((i, j))
    return {p: r for r, p in enumerate(sorted(pts))}


def upper_half_rank(n: Mode) -> int:
    """Position of n in the canonical enumeration of Z^2_+ minus the origin."""
    if not n.in_upper_half() or not n:
        raise ValueError(f"{n.as_tuple()} is not in Z^2_+ \\ {{0}}")
    k = max(abs(n.n1), abs(n.n2))
    return _shell_start(k) + _shell_modes(k)[n.as_tuple()]


def gaussian_pairs(seed: int, index: int, count: int) -> np.ndarray:
    """(count, 2) standard normals for ranks 0..count-1 of stream (seed, index)."""
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    raw = np.random.Philox(key=key).random_raw(2 * count)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u).reshape(count, 2)


@dataclass(frozen=True)
class SamplerConfig:
    sequence: CoefficientSequence
    truncation: int
    seed: int = 0
    sample_count: int = 1

    def __post_init__(self):
        if self.truncation < self.sequence.max_component:
            raise SequenceError(
                f"truncation {self.truncation} cannot hold support up to |n_i| = {self.sequence.max_component}"
            )
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")

    def to_json(self) -> dict:
        return {
            "sequence": self.sequence.to_json(),
            "sequence_hash": self.sequence.content_hash(),
            "truncation": self.truncation,
            "seed": self.seed,
            "sample_count": self.sample_count,
        }


_LAYOUTS: dict = {}


def _layout(seq: CoefficientSequence, N: int):
    key = (seq.content_hash(), N)
    if key in _LAYOUTS:
        return _LAYOUTS[key]
    modes = [n for n in seq.support if n.in_upper_half()]
    ranks = np.array([upper_half_rank(n) for n in modes], dtype=np.int64)
    rows = np.array([n.n1 + N for n in modes], dtype=np.int64)
    cols = np.array([n.n2 + N for n in modes], dtype=np.int64)
    a = np.array([seq[n] for n in modes], dtype=np.float64)
    if len(_LAYOUTS) > 64:
        _LAYOUTS.clear()
    _LAYOUTS[key] = (ranks, rows, cols, a)
    return _LAYOUTS[key]


def sample_coeffs(cfg: SamplerConfig, indices: Iterable[int]) -> np.ndarray:
    """Coefficient arrays of shape (len(indices), 2N+1, 2N+1)."""
    idx = [int(i) for i in indices]
    N = cfg.truncation
    ranks, rows, cols, a = _layout(cfg.sequence, N)
    out = np.zeros((len(idx), 2 * N + 1, 2 * N + 1), dtype=np.complex128)
    if ranks.size == 0:
        return out
    count = int(ranks.max()) + 1
    for b, i in enumerate(idx):
        if not 0 <= i < cfg.sample_count:
            raise IndexError(f"sample index {i} outside [0, {cfg.sample_count})")
        g = gaussian_pairs(cfg.seed, i, count)[ranks]
        c = a * (g[:, 0] + 1j * g[:, 1])
        out[b, rows, cols] = c
        out[b, 2 * N - rows, 2 * N - cols] = np.conj(c)
    return out


def sample(cfg: SamplerConfig, index: int) -> SpectralField:
    return SpectralField(sample_coeffs(cfg, [index])[0])
