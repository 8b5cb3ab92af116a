import json
from fractions import Fraction

import mpmath
import pytest

from euler_gauss.certificate import (
    REFERENCE_EPSILON_30,
    REFERENCE_HALF_GAMMA_30,
    Convention,
    UnsupportedProfileError,
    Verdict,
    certify,
    decide,
    gamma_partial_interval,
    gamma_partial_interval_extended,
    tail_bound,
)
from euler_gauss.interval import Interval
from euler_gauss.lattice import CoefficientSequence, make_profile, named_profile


def _powerlog(N):
    return make_profile("power_log", {}, N)


def _oracle_half_gamma(N, weight_power, prec=400):
    """Point evaluation at high precision, written out from the definition."""
    with mpmath.workprec(prec):
        modes = [(i, j) for i in range(-N, N + 1) for j in range(-N, N + 1) if 0 < i * i + j * j < N * N]

        def a2(i, j):
            b = mpmath.mpf(1 + i * i + j * j)
            return 1 / (b**5 * mpmath.log(b + 3) ** 2)

        def w(r2):
            return mpmath.mpf(1 + r2) ** weight_power

        total = mpmath.mpf(0)
        for n in modes:
            for q in modes:
                cross = q[1] * n[0] - q[0] * n[1]
                if cross == 0:
                    continue
                rn, rq = n[0] ** 2 + n[1] ** 2, q[0] ** 2 + q[1] ** 2
                rp = (n[0] + q[0]) ** 2 + (n[1] + q[1]) ** 2
                inn, inq, inp = mpmath.mpf(1) / rn, mpmath.mpf(1) / rq, mpmath.mpf(1) / rp
                beta = w(rn) * (inq - inp) + w(rq) * (inp - inn) + w(rp) * (inn - inq)
                total += a2(*n) * a2(*q) * cross * cross / 2 * (inn - inq) * beta
        return total


def test_n1_is_empty():
    r = gamma_partial_interval(_powerlog(1), 0.5, 1)
    assert (r.lo, r.hi) == (0.0, 0.0)


def test_n2_extended_width_and_oracle():
    ext = gamma_partial_interval_extended(_powerlog(2), 0.5, 2)
    oracle = _oracle_half_gamma(2, 1)
    with mpmath.workprec(400):
        assert ext.a <= oracle <= ext.b
        rel = (ext.b - ext.a) / abs(oracle)
    assert rel < 1e-18
    dbl = gamma_partial_interval(_powerlog(2), 0.5, 2)
    assert mpmath.mpf(dbl.lo) <= oracle <= mpmath.mpf(dbl.hi)


@pytest.mark.parametrize("convention,power", [("appendix", 1), ("standard", 0.5)])
def test_small_n_against_oracle(convention, power):
    r = gamma_partial_interval(_powerlog(5), 0.5, 5, convention)
    v = _oracle_half_gamma(5, power, prec=200)
    assert mpmath.mpf(r.lo) <= v <= mpmath.mpf(r.hi)
    assert r.width < 1e-12 * abs(float(v))


def test_monotone_refinement():
    for N in (2, 3, 4):
        dbl = gamma_partial_interval(_powerlog(N), 0.5, N)
        ext = gamma_partial_interval(_powerlog(N), 0.5, N, precision="extended")
        assert ext.width <= dbl.width
        assert ext.intersects(dbl)


def test_tail_bound_formula():
    eps = tail_bound(30)
    exact = Fraction(1536, 30**5) * (Fraction(10, 6) + Fraction(3, 30**8))
    assert eps.contains(exact)
    assert eps.hi <= float(Fraction(REFERENCE_EPSILON_30)) * (1 + 1e-12)
    assert abs(eps.mid - float(exact)) <= 1e-12 * float(exact)


def test_tail_bound_scaling():
    r = tail_bound(60).hi / tail_bound(30).hi
    assert r == pytest.approx(2.0**-5, rel=1e-10)


def test_tail_bound_preconditions():
    with pytest.raises(ValueError):
        tail_bound(1)
    with pytest.raises(UnsupportedProfileError):
        tail_bound(30, named_profile("lemma61"))
    with pytest.raises(UnsupportedProfileError):
        tail_bound(30, _powerlog(30), s=1.0)
    with pytest.raises(UnsupportedProfileError):
        tail_bound(30, make_profile("power_log", {"power": 4}, 30))


def test_decide_rule():
    eps = Interval(1)
    assert decide(Interval(2, 3), eps) is Verdict.POSITIVE
    assert decide(Interval(-3, -2), eps) is Verdict.NEGATIVE
    assert decide(Interval(0.5, 3), eps) is Verdict.INCONCLUSIVE
    assert decide(Interval(1, 3), eps) is Verdict.INCONCLUSIVE
    assert decide(Interval(2, 3), None) is Verdict.INCONCLUSIVE


@pytest.mark.parametrize("N", [3, 10, 20])
def test_below_break_even_is_inconclusive(N):
    c = certify(_powerlog(N), 0.5, N)
    assert c.verdict is Verdict.INCONCLUSIVE
    assert c.half_gamma_N.lo > 0


def test_n10_tail_dominates():
    c = certify(_powerlog(10), 0.5, 10)
    assert c.tail_bound.hi == pytest.approx(2.56e-2, rel=1e-3)


def test_zero_profile():
    zero = CoefficientSequence({}, 1, name="zero")
    c = certify(zero, 0.5, 5)
    assert (c.half_gamma_N.lo, c.half_gamma_N.hi) == (0.0, 0.0)
    assert c.verdict is Verdict.INCONCLUSIVE


def test_unsupported_profile_strict():
    with pytest.raises(UnsupportedProfileError):
        certify(named_profile("lemma61"), 0.5, 5)
    c = certify(named_profile("lemma61"), 0.5, 5, strict=False)
    assert c.tail_bound is None and c.verdict is Verdict.INCONCLUSIVE


def test_lemma61_partial_matches_gamma():
    from euler_gauss.gamma import gamma

    # with the standard convention the partial sum is the closed form over the disc
    r = gamma_partial_interval(named_profile("lemma61"), 1.5, 5, Convention.STANDARD)
    assert r.mid == pytest.approx(gamma(named_profile("lemma61"), 1.5).gamma_bare, rel=1e-14)


def test_reference_n30():
    c = certify(_powerlog(30), 0.5, 30)
    lo, hi = (float(Fraction(x)) for x in REFERENCE_HALF_GAMMA_30)
    assert c.half_gamma_N.intersects(Interval(lo, hi))
    assert c.half_gamma_N.width <= 3e-14
    assert c.tail_bound.hi <= 1.0001 * float(Fraction(REFERENCE_EPSILON_30))
    assert c.verdict is Verdict.POSITIVE
    out = c.to_json()
    assert out["verdict"] == "PositiveCertified"
    json.dumps(out)


def test_standard_convention_n30_not_certified():
    c = certify(_powerlog(30), 0.5, 30, Convention.STANDARD)
    assert c.verdict is Verdict.INCONCLUSIVE
    assert 0 < c.half_gamma_N.hi < c.tail_bound.lo
