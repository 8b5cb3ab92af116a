"""Rigorous enclosure of the partial sum gamma_N and its analytic tail bound.

The partial sum runs over the Euclidean disc 0 < |n|, |q| < N:

    half_gamma_N = sum |a_n|^2 |a_q|^2 (q.n_perp)^2 / 2 (1/|n|^2 - 1/|q|^2) beta_{n,q}

Two weight conventions for beta are available. ``standard`` uses
<n>^{2s} = (1 + |n|^2)^s. ``appendix`` uses (1 + |n|^2)^{2s}; this is the
convention that reproduces the reference enclosure
[0.00011184535610465990373, 0.00011184535613147070557] at s = 1/2, N = 30.
"""

from __future__ import annotations

import math
import platform
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .interval import Interval, IntervalArray, IntervalDomainError, interval_sum
from .lattice import CoefficientSequence, Profile

__all__ = [
    "Certificate",
    "Verdict",
    "Convention",
    "UnsupportedProfileError",
    "gamma_partial_interval",
    "tail_bound",
    "certify",
    "REFERENCE_HALF_GAMMA_30",
    "REFERENCE_EPSILON_30",
]

REFERENCE_HALF_GAMMA_30 = ("0.00011184535610465990373", "0.00011184535613147070557")
REFERENCE_EPSILON_30 = "0.00010534979423897216787"


class UnsupportedProfileError(ValueError):
    """No certified tail bound exists for the requested profile / s."""


class Verdict(str, Enum):
    POSITIVE = "PositiveCertified"
    NEGATIVE = "NegativeCertified"
    INCONCLUSIVE = "Inconclusive"


class Convention(str, Enum):
    APPENDIX = "appendix"
    STANDARD = "standard"


def _weight_exponent(s: float, convention: Convention) -> float:
    e = 2 * s if Convention(convention) is Convention.APPENDIX else s
    if e < 0 or (2 * e) != int(2 * e):
        raise UnsupportedProfileError(
            f"interval weights need (1+|n|^2)^e with e a non-negative multiple of 1/2, got e={e}"
        )
    return e


def _weight_table(max_sq: int, e: float) -> IntervalArray:
    """(1 + m)^e for m = 0..max_sq."""
    base = IntervalArray.exact(np.arange(max_sq + 1, dtype=np.float64) + 1.0)
    k = int(e)
    out = base.integer_pow(k) if k else IntervalArray.exact(np.ones(max_sq + 1))
    if e - k:
        out = out.mul_nonneg(base.sqrt())
    return out


def _inverse_table(max_sq: int) -> IntervalArray:
    m = np.arange(max_sq + 1, dtype=np.float64)
    m[0] = 1.0  # index 0 never used unmasked
    return IntervalArray.exact(np.ones_like(m)) / IntervalArray.exact(m)


def _modes_in_disc(N: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(-N, N + 1, dtype=np.int64)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    r2 = k1 * k1 + k2 * k2
    keep = (r2 > 0) & (r2 < N * N)
    return k1[keep], k2[keep]


def _coefficient_squares(profile: CoefficientSequence, n1: np.ndarray, n2: np.ndarray):
    """Enclosures of a_n^2 on the given modes, plus the exact mask a_n != 0."""
    r2 = n1 * n1 + n2 * n2
    if profile.profile is Profile.POWER_LOG:
        p = profile.params.get("power", 5.0)
        shift = profile.params.get("shift", 3.0)
        if p != int(p) or shift != int(shift):
            raise UnsupportedProfileError("interval evaluation needs integer power and shift")
        inside = r2 <= profile.radius * profile.radius
        bracket_sq = IntervalArray.exact(1.0 + r2)
        # a_n^2 = (1+|n|^2)^{-p} / log(shift + 1 + |n|^2)^2
        lg = IntervalArray.exact(shift + 1.0 + r2).log()
        denom = bracket_sq.integer_pow(int(p)).mul_nonneg(lg.square())
        a2 = IntervalArray.exact(np.ones(r2.size)) / denom
        return a2, inside
    vals = np.array([profile[(int(i), int(j))] for i, j in zip(n1, n2)], dtype=np.float64)
    # stored doubles are the definition of an explicit sequence
    return IntervalArray.exact(np.abs(vals)).square(), vals != 0


def gamma_partial_interval(
    profile: CoefficientSequence,
    s: float,
    N: int,
    convention: Convention | str = Convention.APPENDIX,
    precision: str = "double",
    chunk: int = 1 << 20,
) -> Interval:
    """Interval containing half_gamma_N (see module docstring).

    ``precision="extended"`` evaluates with mpmath interval arithmetic at 106
    bits, scalar and slow; intended for small N cross-checks.
    """
    convention = Convention(convention)
    if N < 1:
        raise ValueError("N must be >= 1")
    if precision == "extended":
        return _to_double_interval(gamma_partial_interval_extended(profile, s, N, convention))
    e = _weight_exponent(s, convention)
    n1, n2 = _modes_in_disc(N)
    M = n1.size
    if M == 0:
        return Interval(0)
    a2, nz = _coefficient_squares(profile, n1, n2)
    n1, n2, a2 = n1[nz], n2[nz], a2[nz]
    M = n1.size
    if M == 0:
        return Interval(0)
    r2 = n1 * n1 + n2 * n2
    max_sq = 4 * N * N
    W = _weight_table(max_sq, e)
    INV = _inverse_table(max_sq)

    rows = max(1, chunk // M)
    lo_parts: list[float] = []
    hi_parts: list[float] = []
    for start in range(0, M, rows):
        i = np.arange(start, min(M, start + rows))
        ii, jj = np.meshgrid(i, np.arange(M), indexing="ij")
        ii, jj = ii.ravel(), jj.ravel()
        cross = -n1[jj] * n2[ii] + n2[jj] * n1[ii]  # q . n_perp
        keep = cross != 0
        ii, jj, cross = ii[keep], jj[keep], cross[keep]
        p1, p2 = n1[ii] + n1[jj], n2[ii] + n2[jj]
        ps = p1 * p1 + p2 * p2
        inv_n, inv_q, inv_p = INV[r2[ii]], INV[r2[jj]], INV[ps]
        b = (
            W[r2[ii]] * (inv_q - inv_p)
            + W[r2[jj]] * (inv_p - inv_n)
            + W[ps] * (inv_n - inv_q)
        )
        c2 = IntervalArray.exact((cross * cross).astype(np.float64) * 0.5)  # exact: halves of integers
        term = a2[ii].mul_nonneg(a2[jj]).mul_nonneg(c2) * (inv_n - inv_q) * b
        part = interval_sum(term)
        lo_parts.append(part.lo)
        hi_parts.append(part.hi)
    return interval_sum(IntervalArray(np.array(lo_parts), np.array(hi_parts)))


def _to_double_interval(x) -> Interval:
    import mpmath

    lo = float(mpmath.mpf(x.a))
    hi = float(mpmath.mpf(x.b))
    # float() rounds to nearest; step outward when that moved an endpoint inward
    if mpmath.mpf(lo) > x.a:
        lo = math.nextafter(lo, -math.inf)
    if mpmath.mpf(hi) < x.b:
        hi = math.nextafter(hi, math.inf)
    return Interval._raw(lo, hi)


def gamma_partial_interval_extended(profile: CoefficientSequence, s: float, N: int,
                                    convention: Convention | str = Convention.APPENDIX, prec: int = 106):
    """Same enclosure as :func:`gamma_partial_interval` as an ``mpmath.iv`` interval at ``prec`` bits."""
    import mpmath

    convention = Convention(convention)
    iv = mpmath.iv
    old = iv.prec
    iv.prec = prec
    try:
        e = _weight_exponent(s, convention)
        n1, n2 = _modes_in_disc(N)
        modes = list(zip(n1.tolist(), n2.tolist()))
        if profile.profile is Profile.POWER_LOG:
            p = int(profile.params.get("power", 5.0))
            shift = int(profile.params.get("shift", 3.0))
            R2 = profile.radius * profile.radius

            def a2(i, j):
                r2 = i * i + j * j
                if r2 > R2:
                    return iv.mpf(0)
                return 1 / (iv.mpf(1 + r2) ** p * iv.log(iv.mpf(shift + 1 + r2)) ** 2)
        else:
            def a2(i, j):
                v = iv.mpf(profile[(i, j)])
                return v * v

        def w(r2):
            k = int(e)
            out = iv.mpf(1 + r2) ** k
            return out * iv.sqrt(iv.mpf(1 + r2)) if e - k else out

        A = {m: a2(*m) for m in modes}
        total = iv.mpf(0)
        for (i, j) in modes:
            if A[(i, j)] == 0:
                continue
            rn = i * i + j * j
            for (k, l) in modes:
                cross = -k * j + l * i
                if cross == 0 or A[(k, l)] == 0:
                    continue
                rq = k * k + l * l
                rp = (i + k) ** 2 + (j + l) ** 2
                inn, inq, inp = 1 / iv.mpf(rn), 1 / iv.mpf(rq), 1 / iv.mpf(rp)
                b = w(rn) * (inq - inp) + w(rq) * (inp - inn) + w(rp) * (inn - inq)
                total += A[(i, j)] * A[(k, l)] * iv.mpf(cross * cross) / 2 * (inn - inq) * b
        return total
    finally:
        iv.prec = old


def _is_certified_profile(profile: CoefficientSequence) -> bool:
    return (
        profile.profile is Profile.POWER_LOG
        and profile.params.get("power", 5.0) == 5.0
        and profile.params.get("shift", 3.0) == 3.0
    )


def tail_bound(N: int, profile: CoefficientSequence | None = None, s: float = 0.5) -> Interval:
    """Enclosure of eps(N) = (1536/N^5)(10/6 + 3/N^8), the bound on |gamma - gamma_N|/2.

    Only sound for a_n = <n>^{-5}/log(3 + <n>^2) at s = 1/2.
    """
    if profile is not None and not _is_certified_profile(profile):
        raise UnsupportedProfileError("certified tail bound exists only for the <n>^-5/log(3+<n>^2) profile")
    if s != 0.5:
        raise UnsupportedProfileError("certified tail bound exists only at s = 1/2")
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise ValueError("tail bound requires integer N >= 2")
    N = int(N)
    return Interval(1536) / Interval(N**5) * (Interval(10) / Interval(6) + Interval(3) / Interval(N**8))


@dataclass(frozen=True)
class Certificate:
    profile_id: str
    s: float
    N: int
    half_gamma_N: Interval
    tail_bound: Interval | None
    verdict: Verdict
    convention: Convention = Convention.APPENDIX
    runtime_ms: float | None = None

    def to_json(self) -> dict:
        return {
            "profile": self.profile_id,
            "s": self.s,
            "N": self.N,
            "convention": self.convention.value,
            "half_gamma_N": self.half_gamma_N.to_list(),
            "epsilon": self.tail_bound.to_list() if self.tail_bound is not None else None,
            "verdict": self.verdict.value,
            "cpu_info": f"{platform.machine()} {platform.processor() or platform.system()}".strip(),
            "runtime_ms": self.runtime_ms,
        }


def decide(half_gamma: Interval, eps: Interval | None) -> Verdict:
    if eps is None:
        return Verdict.INCONCLUSIVE
    # lower bound of half_gamma - eps computed with outward rounding
    if (half_gamma - Interval._raw(0.0, eps.hi)).lo > 0:
        return Verdict.POSITIVE
    if (half_gamma + Interval._raw(0.0, eps.hi)).hi < 0:
        return Verdict.NEGATIVE
    return Verdict.INCONCLUSIVE


def certify(profile: CoefficientSequence, s: float, N: int,
            convention: Convention | str = Convention.APPENDIX, strict: bool = True) -> Certificate:
    """Assemble the enclosure, the tail bound and the verdict.

    With ``strict`` an unsupported profile/s raises; otherwise the certificate
    is returned with no tail bound and an Inconclusive verdict.
    """
    t0 = time.perf_counter()
    try:
        eps = tail_bound(N, profile, s)
    except UnsupportedProfileError:
        if strict and len(profile):
            raise
        eps = None
    half = gamma_partial_interval(profile, s, N, convention)
    runtime = (time.perf_counter() - t0) * 1e3
    return Certificate(
        profile_id=profile.name or profile.content_hash(),
        s=float(s),
        N=int(N),
        half_gamma_N=half,
        tail_bound=eps,
        verdict=decide(half, eps),
        convention=Convention(convention),
        runtime_ms=runtime,
    )


__all__ += ["decide", "gamma_partial_interval_extended", "IntervalDomainError"]
