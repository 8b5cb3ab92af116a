"""Closed-form evaluation of the quadratic growth coefficient gamma_s.

For a sequence (a_n) the coefficient is

    gamma_s = sum_{n,q} |a_n|^2 |a_q|^2 (q.n_perp)^2 / 2 (1/|n|^2 - 1/|q|^2) beta_{n,q}

("bare"; prefactor mode "paper" divides by (2 pi)^4). Pairs with
n = 0, q = 0 or n + q = 0 contribute nothing and are skipped before beta is
formed. Norms, cross products and degeneracy tests use exact integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .lattice import CoefficientSequence, Mode

__all__ = [
    "GammaReport",
    "PrefactorMode",
    "SupportClass",
    "SupportKind",
    "beta",
    "gamma_term",
    "gamma",
    "expected_B1_normsq_closed",
    "expected_omega_B2_closed",
    "gamma_consistency",
    "degenerate_pair",
    "classify_support",
    "scan_s",
    "FOURIER_PREFACTOR",
]

FOURIER_PREFACTOR = 1.0 / (2.0 * math.pi) ** 4


class PrefactorMode(str, Enum):
    PAPER = "paper"
    BARE = "bare"


@dataclass(frozen=True)
class GammaReport:
    s: float
    sequence_id: str
    gamma_bare: float
    partial_radius: int | str
    term_count: int
    support_class: "SupportClass | None" = None

    @property
    def gamma_paper(self) -> float:
        return self.gamma_bare * FOURIER_PREFACTOR

    def value(self, mode: PrefactorMode = PrefactorMode.BARE) -> float:
        return self.gamma_bare if PrefactorMode(mode) is PrefactorMode.BARE else self.gamma_paper

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "sequence": self.sequence_id,
            "gamma_bare": self.gamma_bare,
            "gamma_paper": self.gamma_paper,
            "radius": self.partial_radius,
            "terms": self.term_count,
            "support_class": self.support_class.to_json() if self.support_class else None,
        }


class SupportKind(str, Enum):
    LINE = "Line"
    CIRCLE = "Circle"
    NON_DEGENERATE = "NonDegenerate"
    EMPTY = "Empty"


@dataclass(frozen=True)
class SupportClass:
    kind: SupportKind
    direction: Mode | None = None
    radius_sq: int | None = None

    @property
    def degenerate(self) -> bool:
        return self.kind in (SupportKind.LINE, SupportKind.CIRCLE, SupportKind.EMPTY)

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.direction is not None:
            out["direction"] = [self.direction.n1, self.direction.n2]
        if self.radius_sq is not None:
            out["radius_sq"] = self.radius_sq
        return out


def beta(n: Mode, q: Mode, s: float) -> float:
    """Three-term weight; requires n, q, n + q all nonzero."""
    if s == 0:
        return 0.0
    p = n + q
    inn, inq, inp = 1.0 / n.norm_sq, 1.0 / q.norm_sq, 1.0 / p.norm_sq
    return (
        n.bracket_sq**s * (inq - inp)
        + q.bracket_sq**s * (inp - inn)
        + p.bracket_sq**s * (inn - inq)
    )


def gamma_term(a: CoefficientSequence, n: Mode, q: Mode, s: float) -> float:
    cross = q.dot(n.perp)
    if cross == 0 or n.norm_sq == q.norm_sq:
        return 0.0
    an, aq = a[n], a[q]
    return an * an * aq * aq * cross * cross / 2 * (1.0 / n.norm_sq - 1.0 / q.norm_sq) * beta(n, q, s)


@dataclass
class _Pairs:
    """All ordered pairs (n, q) of support modes with nonzero cross product."""

    n2: np.ndarray
    q2: np.ndarray
    p2: np.ndarray
    cross_sq: np.ndarray
    weight: np.ndarray  # |a_n|^2 |a_q|^2
    count: int = field(default=0)


def _pairs(a: CoefficientSequence, radius: int | None) -> _Pairs:
    n1, n2, v = a.arrays()
    r2 = n1 * n1 + n2 * n2
    if radius is not None:
        keep = r2 < radius * radius
        n1, n2, v, r2 = n1[keep], n2[keep], v[keep], r2[keep]
    # q . n_perp = -q1 n2 + q2 n1 with n on axis 0, q on axis 1
    cross = (-n1[None, :] * n2[:, None] + n2[None, :] * n1[:, None])
    i, j = np.nonzero(cross)
    p1 = n1[i] + n1[j]
    p2 = n2[i] + n2[j]
    c = cross[i, j]
    return _Pairs(
        n2=r2[i],
        q2=r2[j],
        p2=p1 * p1 + p2 * p2,
        cross_sq=(c * c).astype(np.float64),
        weight=(v[i] * v[i]) * (v[j] * v[j]),
        count=int(i.size),
    )


def _beta_arrays(P: _Pairs, s: float) -> np.ndarray:
    inn, inq, inp = 1.0 / P.n2, 1.0 / P.q2, 1.0 / P.p2
    return (
        (1.0 + P.n2) ** s * (inq - inp)
        + (1.0 + P.q2) ** s * (inp - inn)
        + (1.0 + P.p2) ** s * (inn - inq)
    )


def _sum(terms: np.ndarray) -> float:
    # fsum is correctly rounded, hence independent of term order and threading
    return math.fsum(terms.tolist()) if terms.size else 0.0


def gamma(a: CoefficientSequence, s: float, summation_radius: int | None = None) -> GammaReport:
    """Bare gamma over 0 < |n|, |q| < summation_radius (whole support if None)."""
    P = _pairs(a, summation_radius)
    if s == 0:
        # beta telescopes to 0 identically
        total = 0.0
    else:
        terms = P.weight * P.cross_sq / 2 * (1.0 / P.n2 - 1.0 / P.q2) * _beta_arrays(P, s)
        total = _sum(terms)
    return GammaReport(
        s=float(s),
        sequence_id=a.name or a.content_hash(),
        gamma_bare=total,
        partial_radius="exact-finite-support" if summation_radius is None else int(summation_radius),
        term_count=P.count,
        support_class=classify_support(a) if len(a) <= 4096 else None,
    )


def expected_B1_normsq_closed(a: CoefficientSequence, s: float, summation_radius: int | None = None) -> float:
    """sum <n+q>^{2s} (q.n_perp)^2 / 2 (1/|q|^2 - 1/|n|^2)^2 |a_q|^2 |a_n|^2."""
    P = _pairs(a, summation_radius)
    d = 1.0 / P.q2 - 1.0 / P.n2
    return _sum((1.0 + P.p2) ** s * P.cross_sq / 2 * d * d * P.weight)


def expected_omega_B2_closed(a: CoefficientSequence, s: float, summation_radius: int | None = None) -> float:
    """1/2 sum <n>^{2s} |a_n|^2 |a_q|^2 (q.n_perp)^2 (1/|n|^2 - 1/|q|^2)(1/|q|^2 - 1/|q+n|^2)."""
    P = _pairs(a, summation_radius)
    return _sum(
        0.5 * (1.0 + P.n2) ** s * P.weight * P.cross_sq
        * (1.0 / P.n2 - 1.0 / P.q2) * (1.0 / P.q2 - 1.0 / P.p2)
    )


def gamma_consistency(a: CoefficientSequence, s: float, summation_radius: int | None = None) -> tuple[float, float]:
    """(gamma, E||B1||^2 + 2 E<Omega, B2>) from the closed forms; equal up to roundoff."""
    lhs = gamma(a, s, summation_radius).gamma_bare
    rhs = expected_B1_normsq_closed(a, s, summation_radius) + 2.0 * expected_omega_B2_closed(a, s, summation_radius)
    return lhs, rhs


def degenerate_pair(n: Mode, q: Mode) -> bool:
    """(n.q_perp)(1/|n|^2 - 1/|q|^2) == 0, decided in integers."""
    return n.dot(q.perp) == 0 or n.norm_sq == q.norm_sq


def _primitive(n: Mode) -> Mode:
    g = math.gcd(n.n1, n.n2)
    d = Mode(n.n1 // g, n.n2 // g)
    return d if d.in_upper_half() else -d


def classify_support(a: CoefficientSequence) -> SupportClass:
    modes = a.support
    if not modes:
        return SupportClass(SupportKind.EMPTY)
    first = modes[0]
    if all(first.dot(m.perp) == 0 for m in modes):
        return SupportClass(SupportKind.LINE, direction=_primitive(first))
    if all(m.norm_sq == first.norm_sq for m in modes):
        return SupportClass(SupportKind.CIRCLE, radius_sq=first.norm_sq)
    return SupportClass(SupportKind.NON_DEGENERATE)


@dataclass(frozen=True)
class ScanResult:
    values: list[tuple[float, float]]
    flagged: float | None
    threshold: float

    def to_json(self) -> dict:
        return {
            "values": [{"s": s, "gamma_bare": g} for s, g in self.values],
            "first_flagged_s": self.flagged,
            "threshold": self.threshold,
        }


def scan_s(a: CoefficientSequence, s_grid: Sequence[float], threshold: float = 1e-12,
           summation_radius: int | None = None) -> ScanResult:
    if len(s_grid) == 0:
        raise ValueError("s_grid must be nonempty")
    values = [(float(s), gamma(a, s, summation_radius).gamma_bare) for s in s_grid]
    flagged = next((s for s, g in values if abs(g) > threshold), None)
    return ScanResult(values, flagged, threshold)
