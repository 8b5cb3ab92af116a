"""Monte Carlo estimates of the Gaussian expectations and the short-time growth law.

``KAPPA`` converts the a^4 closed forms of :mod:`euler_gauss.gamma` into
expectations for the sampler's law: each factor E|g_n|^2 = 2 contributes a
factor 2, so E||B1||^2 = KAPPA * (closed form). The value is measured exactly
by :func:`euler_gauss.wick.measure_kappa` and asserted in the test suite.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .bilinear import B1_coeffs, B2_coeffs
from .flow import evolve_batch
from .functionals import Functional, FunctionalKind
from .gamma import classify_support, gamma
from .lattice import embed, sobolev_norm_sq, sobolev_weights
from .rng import SamplerConfig, sample_coeffs

__all__ = [
    "KAPPA",
    "MCEstimate",
    "evaluate_functional",
    "mc_estimate",
    "ExpansionFit",
    "expansion_fit",
    "GrowthResult",
    "growth_experiment",
    "write_manifest",
    "write_results_csv",
]

KAPPA = 4.0
CHUNK = 2048
# sequences with at most this many modes use the exact-zero direct convolution
DIRECT_MODES = 16


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    sample_count: int

    @classmethod
    def from_values(cls, values: np.ndarray) -> "MCEstimate":
        v = np.asarray(values, dtype=np.float64)
        if v.size < 2:
            raise ValueError("need at least two samples")
        mean = math.fsum(v.tolist()) / v.size
        var = math.fsum(((v - mean) ** 2).tolist()) / (v.size - 1)
        return cls(mean, math.sqrt(var / v.size), int(v.size))

    def within(self, value: float, k: float = 3.0) -> bool:
        return abs(self.mean - value) <= k * self.stderr

    def to_json(self) -> dict:
        return asdict(self)


def _method(cfg: SamplerConfig) -> str:
    return "direct" if len(cfg.sequence) <= DIRECT_MODES else "fft"


def _inner(f: np.ndarray, g: np.ndarray, s: float) -> np.ndarray:
    N = max(f.shape[-1], g.shape[-1]) // 2
    f, g = embed(f, N), embed(g, N)
    w = sobolev_weights(N, s)
    return np.sum(w * (f.real * g.real + f.imag * g.imag), axis=(-2, -1))


def _occupied(c: np.ndarray) -> int:
    N = c.shape[-1] // 2
    idx = np.argwhere(np.any(c.reshape(-1, 2 * N + 1, 2 * N + 1) != 0, axis=0))
    return int(np.max(np.abs(idx - N))) if idx.size else 0


class _Terms:
    """Lazily computed B1, B2 of a batch (exact: every generated mode kept)."""

    def __init__(self, c: np.ndarray, method: str):
        # grow mode sizes outputs from the input array, so crop to the occupied square first
        self.c, self.method = embed(c, _occupied(c)), method
        self._b1 = self._b2 = None

    @property
    def b1(self) -> np.ndarray:
        if self._b1 is None:
            self._b1 = B1_coeffs(self.c, grow=True, method=self.method)
        return self._b1

    @property
    def b2(self) -> np.ndarray:
        if self._b2 is None:
            self._b2 = B2_coeffs(self.c, self.b1, grow=True, method=self.method)
        return self._b2


def _evaluate(T: _Terms, f: Functional) -> np.ndarray:
    k, s = f.kind, f.s
    if k is FunctionalKind.HS_NORM_SQ:
        return sobolev_norm_sq(T.c, s)
    if k is FunctionalKind.OMEGA_DOT_B1:
        return _inner(T.c, T.b1, s)
    if k is FunctionalKind.B1_NORM_SQ:
        return sobolev_norm_sq(T.b1, s)
    if k is FunctionalKind.OMEGA_DOT_B2:
        return _inner(T.c, T.b2, s)
    if k is FunctionalKind.B1_DOT_B2:
        return _inner(T.b1, T.b2, s)
    return sobolev_norm_sq(T.b2, s)


def evaluate_functional(c: np.ndarray, functional: Functional, method: str = "fft") -> np.ndarray:
    """Per-sample values of the functional on a batch of coefficient arrays."""
    return np.atleast_1d(_evaluate(_Terms(np.asarray(c), method), functional))


def _chunks(M: int):
    for start in range(0, M, CHUNK):
        yield range(start, min(M, start + CHUNK))


def mc_estimate(cfg: SamplerConfig, functional: Functional, M: int | None = None) -> MCEstimate:
    M = cfg.sample_count if M is None else M
    if M < 2:
        raise ValueError("M must be >= 2")
    if M > cfg.sample_count:
        raise ValueError("M exceeds the configured sample_count")
    method = _method(cfg)
    vals = np.concatenate([evaluate_functional(sample_coeffs(cfg, idx), functional, method) for idx in _chunks(M)])
    return MCEstimate.from_values(vals)


@dataclass(frozen=True)
class ExpansionFit:
    """E||Omega - t B1 + t^2 B2||^2 = e0 + e1 t + e2 t^2 + e3 t^3 + e4 t^4."""

    s: float
    coefficients: tuple[MCEstimate, ...]
    max_residual: float  # polynomial vs direct norm on t_grid, relative

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "coefficients": [e.to_json() for e in self.coefficients],
            "max_residual": self.max_residual,
        }


def expansion_fit(cfg: SamplerConfig, s: float, t_grid: Sequence[float], M: int | None = None) -> ExpansionFit:
    """Per-sample exact t-polynomial from six inner products, averaged over samples.

    ``t_grid`` is only used to cross-check the polynomial against direct
    evaluation of the norm.
    """
    if len(t_grid) < 5:
        raise ValueError("t_grid needs at least 5 points")
    M = cfg.sample_count if M is None else M
    method = _method(cfg)
    rows, resid = [], 0.0
    for idx in _chunks(M):
        T = _Terms(sample_coeffs(cfg, idx), method)
        oo = sobolev_norm_sq(T.c, s)
        o1 = _inner(T.c, T.b1, s)
        o2 = _inner(T.c, T.b2, s)
        b11 = sobolev_norm_sq(T.b1, s)
        b12 = _inner(T.b1, T.b2, s)
        b22 = sobolev_norm_sq(T.b2, s)
        e = np.stack([oo, -2.0 * o1, b11 + 2.0 * o2, -2.0 * b12, b22], axis=1)
        rows.append(e)
        N = T.b2.shape[-1] // 2
        c, b1, b2 = embed(T.c, N), embed(T.b1, N), embed(T.b2, N)
        for t in t_grid:
            direct = sobolev_norm_sq(c - t * b1 + t * t * b2, s)
            poly = e @ np.array([1.0, t, t * t, t**3, t**4])
            scale = np.maximum(np.abs(direct), 1e-300)
            resid = max(resid, float(np.max(np.abs(poly - direct) / scale)))
    e = np.concatenate(rows)
    return ExpansionFit(float(s), tuple(MCEstimate.from_values(e[:, j]) for j in range(5)), resid)


@dataclass(frozen=True)
class GrowthResult:
    fitted_quadratic: float
    quadratic_stderr: float
    fitted_cubic: float
    reference: float
    ratio: float
    sample_count: int
    times: tuple[float, ...] = field(default_factory=tuple)
    mean_increment: tuple[float, ...] = field(default_factory=tuple)

    def to_json(self) -> dict:
        return asdict(self)


def _time_grid(t_max: float, dt: float, points: int) -> list[float]:
    steps = int(round(t_max / dt))
    if steps < 1 or abs(steps * dt - t_max) > 1e-9 * t_max:
        raise ValueError("dt must divide t_max")
    stride = max(1, steps // points)
    ks = list(range(0, steps + 1, stride))
    if ks[-1] != steps:
        ks.append(steps)
    return [k * dt for k in ks]


def growth_experiment(
    cfg: SamplerConfig,
    s: float,
    t_max: float = 0.05,
    dt: float = 1e-3,
    M: int | None = None,
    antithetic: bool = True,
    points: int = 10,
) -> GrowthResult:
    """Fit E||Omega(t)||^2 - E||Omega0||^2 = c2 t^2 + c3 t^3 over the truncated flow.

    With ``antithetic`` the samples come in pairs (Omega0, -Omega0); since
    -Omega(-t) solves the same equation, each pair averages the even part of
    the increment and the odd orders cancel exactly.
    The reference is KAPPA * gamma_bare of the sequence at s.
    """
    M = cfg.sample_count if M is None else M
    if M < 2:
        raise ValueError("M must be >= 2")
    times = _time_grid(t_max, dt, points)
    tt = np.asarray(times[1:])
    X = np.stack([tt**2, tt**3], axis=1)
    P = np.linalg.pinv(X)
    base_count = M // 2 if antithetic else M
    incs = []
    for idx in _chunks(base_count):
        c0 = sample_coeffs(cfg, idx)
        if antithetic:
            c0 = np.concatenate([c0, -c0])
        traj = evolve_batch(c0, times, dt)
        hs = sobolev_norm_sq(traj, s)  # (T, batch)
        d = hs[1:] - hs[0][None, :]
        if antithetic:
            n = len(idx)
            d = 0.5 * (d[:, :n] + d[:, n:])
        incs.append(d.T)
    inc = np.concatenate(incs)  # (units, T-1)
    coef = inc @ P.T  # per-unit (c2, c3)
    c2 = MCEstimate.from_values(coef[:, 0]) if inc.shape[0] > 1 else MCEstimate(float(coef[0, 0]), 0.0, 1)
    c3 = float(np.mean(coef[:, 1]))
    ref = KAPPA * gamma(cfg.sequence, s).gamma_bare
    if classify_support(cfg.sequence).degenerate:
        ratio = math.nan if c2.mean == 0.0 else math.inf
    else:
        ratio = c2.mean / ref
    return GrowthResult(
        fitted_quadratic=c2.mean,
        quadratic_stderr=c2.stderr,
        fitted_cubic=c3,
        reference=ref,
        ratio=ratio,
        sample_count=inc.shape[0] * (2 if antithetic else 1),
        times=tuple(times),
        mean_increment=(0.0,) + tuple(float(x) for x in inc.mean(axis=0)),
    )


def write_manifest(path, cfg: SamplerConfig, functionals: Sequence[Functional], extra: dict | None = None) -> dict:
    manifest = {
        "config": cfg.to_json(),
        "seed": cfg.seed,
        "sequence_hash": cfg.sequence.content_hash(),
        "functionals": [str(f) for f in functionals],
    }
    if extra:
        manifest.update(extra)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest


def write_results_csv(path, results: Sequence[tuple[Functional, MCEstimate]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["functional", "mean", "stderr", "M"])
        for f, est in results:
            w.writerow([str(f), repr(est.mean), repr(est.stderr), est.sample_count])
