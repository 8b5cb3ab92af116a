"""Exact Gaussian expectations of the functionals for finitely supported sequences.

Every coefficient c_n = a_n g_n is written in the real variables r_j, s_j of
the upper-half representative of n, so the field becomes a vector of complex
polynomials with rational coefficients. Products are multiplied out and the
expectation of each monomial is taken with real Isserlis moments
(E x^{2k} = (2k-1)!!, odd moments zero, distinct variables independent).

This module deliberately shares no code with :mod:`euler_gauss.bilinear`;
it is the oracle the numerical paths are checked against.
"""

from __future__ import annotations

import math
from collections import defaultdict
from fractions import Fraction

from .functionals import DEGREE, Functional, FunctionalKind
from .lattice import CoefficientSequence

__all__ = ["wick_expectation", "wick_mode_expectations", "SupportTooLarge", "MAX_MODES", "measure_kappa"]

# support-size limits by polynomial degree
MAX_MODES = {2: 256, 3: 64, 4: 64, 5: 12, 6: 12}


class SupportTooLarge(ValueError):
    pass


# polynomial: {monomial: Fraction}, monomial = sorted tuple of variable ids (with repeats)
def _padd(p: dict, q: dict, scale: Fraction = Fraction(1)) -> None:
    for m, v in q.items():
        w = p.get(m, 0) + scale * v
        if w:
            p[m] = w
        else:
            p.pop(m, None)


def _pmul(p: dict, q: dict) -> dict:
    out: dict = defaultdict(Fraction)
    for m1, v1 in p.items():
        for m2, v2 in q.items():
            out[tuple(sorted(m1 + m2))] += v1 * v2
    return {m: v for m, v in out.items() if v}


def _cmul(a: tuple, b: tuple) -> tuple[dict, dict]:
    ar, ai = a
    br, bi = b
    re = _pmul(ar, br)
    _padd(re, _pmul(ai, bi), Fraction(-1))
    im = _pmul(ar, bi)
    _padd(im, _pmul(ai, br))
    return re, im


def _initial_field(a: CoefficientSequence) -> dict:
    field = {}
    upper = [n for n in a.support if n.in_upper_half()]
    for j, n in enumerate(upper):
        v = Fraction(a[n])
        r, s = (2 * j,), (2 * j + 1,)
        field[(n.n1, n.n2)] = ({r: v}, {s: v})
        field[(-n.n1, -n.n2)] = ({r: v}, {s: -v})
    return field


def _kernel(k: tuple, m: tuple) -> Fraction:
    """1/2 (m . k_perp)(1/|k|^2 - 1/|m|^2)."""
    cross = -k[1] * m[0] + k[0] * m[1]
    if cross == 0:
        return Fraction(0)
    nk = k[0] * k[0] + k[1] * k[1]
    nm = m[0] * m[0] + m[1] * m[1]
    return Fraction(cross, 2) * (Fraction(1, nk) - Fraction(1, nm))


def _bilinear(f: dict, g: dict, out_modes=None) -> dict:
    """B(f, g)_n = sum_{k+m=n} K(k, m) f_k g_m over the requested output modes."""
    out: dict = {}
    for k, fk in f.items():
        for m, gm in g.items():
            n = (k[0] + m[0], k[1] + m[1])
            if n == (0, 0) or (out_modes is not None and n not in out_modes):
                continue
            K = _kernel(k, m)
            if not K:
                continue
            re, im = _cmul(fk, gm)
            acc = out.setdefault(n, ({}, {}))
            _padd(acc[0], re, K)
            _padd(acc[1], im, K)
    return {n: v for n, v in out.items() if v[0] or v[1]}


def _double_factorial_odd(k: int) -> int:
    # (k - 1)!! for even k
    return math.prod(range(k - 1, 0, -2)) if k > 0 else 1


def _grouped(p: dict) -> dict:
    """Group monomials by the set of variables of odd exponent."""
    groups: dict = defaultdict(list)
    for m, v in p.items():
        counts: dict = defaultdict(int)
        for x in m:
            counts[x] += 1
        odd = tuple(sorted(x for x, c in counts.items() if c % 2))
        groups[odd].append((counts, v))
    return groups


def _expect_product(p: dict, q: dict) -> Fraction:
    """E[p q] for real polynomials p, q."""
    if not p or not q:
        return Fraction(0)
    gp, gq = _grouped(p), _grouped(q)
    total = Fraction(0)
    for mask, items in gp.items():
        other = gq.get(mask)
        if not other:
            continue
        for c1, v1 in items:
            for c2, v2 in other:
                moment = 1
                for x in set(c1) | set(c2):
                    moment *= _double_factorial_odd(c1.get(x, 0) + c2.get(x, 0))
                total += v1 * v2 * moment
    return total


def _expect_re_inner(f: dict, g: dict) -> dict:
    """{n: E Re(f_n conj g_n)} exactly."""
    out = {}
    for n, (fr, fi) in f.items():
        if n not in g:
            continue
        gr, gi = g[n]
        val = _expect_product(fr, gr) + _expect_product(fi, gi)
        if val:
            out[n] = val
    return out


_CACHE: dict = {}


def wick_mode_expectations(a: CoefficientSequence, kind: FunctionalKind) -> dict:
    """Exact per-mode expectations; the H^s weight is applied afterwards."""
    kind = FunctionalKind(kind)
    deg = DEGREE[kind]
    limit = MAX_MODES[deg]
    if len(a) > limit:
        raise SupportTooLarge(
            f"{kind.value} has degree {deg}; exact expansion supports at most {limit} modes, got {len(a)}"
        )
    key = (a.content_hash(), kind)
    if key in _CACHE:
        return _CACHE[key]
    om = _initial_field(a)
    if kind is FunctionalKind.HS_NORM_SQ:
        res = _expect_re_inner(om, om)
    elif kind is FunctionalKind.OMEGA_DOT_B1:
        res = _expect_re_inner(om, _bilinear(om, om, set(om)))
    elif kind is FunctionalKind.B1_NORM_SQ:
        b1 = _bilinear(om, om)
        res = _expect_re_inner(b1, b1)
    elif kind is FunctionalKind.OMEGA_DOT_B2:
        b1 = _bilinear(om, om)
        res = _expect_re_inner(om, _bilinear(om, b1, set(om)))
    elif kind is FunctionalKind.B1_DOT_B2:
        b1 = _bilinear(om, om)
        res = _expect_re_inner(b1, _bilinear(om, b1, set(b1)))
    else:
        b2 = _bilinear(om, _bilinear(om, om))
        res = _expect_re_inner(b2, b2)
    if len(_CACHE) > 256:
        _CACHE.clear()
    _CACHE[key] = res
    return res


def wick_expectation(a: CoefficientSequence, functional: Functional) -> float:
    """E of the functional, exact up to the final weighting by <n>^{2s}."""
    per_mode = wick_mode_expectations(a, functional.kind)
    s = functional.s
    return math.fsum(float(v) * (1.0 + n[0] ** 2 + n[1] ** 2) ** s for n, v in per_mode.items())


def measure_kappa(a: CoefficientSequence | None = None) -> Fraction:
    """Ratio of the exact E||B1||^2 to its a^4 closed form on a two-pair support.

    The closed form is evaluated here in exact rationals at s = 0.
    """
    if a is None:
        a = CoefficientSequence({(1, 0): 1.0, (-1, 0): 1.0, (0, 2): 1.0, (0, -2): 1.0}, 2)
    exact = sum(wick_mode_expectations(a, FunctionalKind.B1_NORM_SQ).values(), Fraction(0))
    closed = Fraction(0)
    modes = a.support
    for n in modes:
        for q in modes:
            cross = -q.n1 * n.n2 + q.n2 * n.n1
            p = n + q
            if cross == 0 or not p:
                continue
            d = Fraction(1, q.norm_sq) - Fraction(1, n.norm_sq)
            closed += Fraction(cross * cross, 2) * d * d * Fraction(a[n]) ** 2 * Fraction(a[q]) ** 2
    if closed == 0:
        raise ValueError("support is degenerate; kappa is undefined there")
    return exact / closed
