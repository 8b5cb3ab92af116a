import random
from fractions import Fraction

import pytest

from euler_gauss.functionals import DEGREE, Functional, FunctionalKind
from euler_gauss.gamma import expected_B1_normsq_closed, expected_omega_B2_closed, gamma
from euler_gauss.lattice import CoefficientSequence, h_sigma_norm_sq, named_profile
from euler_gauss.stochastic import KAPPA
from euler_gauss.wick import MAX_MODES, SupportTooLarge, measure_kappa, wick_expectation, wick_mode_expectations

from conftest import random_support

S_VALUES = (0, 0.5, 1, 2)


def _w(a, kind, s):
    return wick_expectation(a, Functional(FunctionalKind(kind), s))


def test_kappa_measured_exactly(lemma61):
    assert measure_kappa() == 4
    assert measure_kappa(lemma61) == 4
    assert KAPPA == float(measure_kappa())


def test_kappa_on_random_supports():
    rng = random.Random(31)
    for _ in range(5):
        a = random_support(rng, 3)
        if expected_B1_normsq_closed(a, 0) == 0:
            continue
        assert measure_kappa(a) == 4


@pytest.mark.parametrize("s", S_VALUES)
def test_closed_forms_match_oracle(corpus, s):
    for a in corpus:
        b1 = _w(a, "b1_norm_sq", s)
        ob2 = _w(a, "omega_dot_b2", s)
        assert b1 == pytest.approx(KAPPA * expected_B1_normsq_closed(a, s), rel=1e-10, abs=1e-300), a.name
        assert ob2 == pytest.approx(KAPPA * expected_omega_B2_closed(a, s), rel=1e-10, abs=1e-300), a.name


@pytest.mark.parametrize("s", S_VALUES)
def test_gamma_from_oracle(corpus, s):
    for a in corpus:
        g = _w(a, "b1_norm_sq", s) + 2 * _w(a, "omega_dot_b2", s)
        assert g == pytest.approx(KAPPA * gamma(a, s).gamma_bare, rel=1e-10, abs=1e-12), a.name


def test_hs_norm(corpus):
    for a in corpus:
        for s in S_VALUES:
            assert _w(a, "hs_norm_sq", s) == pytest.approx(2 * h_sigma_norm_sq(a, s), rel=1e-14)
    assert _w(named_profile("lemma61"), "hs_norm_sq", 0) == 8.0


def test_third_moments_vanish(corpus):
    for a in corpus:
        assert wick_mode_expectations(a, FunctionalKind.OMEGA_DOT_B1) == {}


def test_b1_b2_vanishes_lemma61(lemma61):
    assert wick_mode_expectations(lemma61, FunctionalKind.B1_DOT_B2) == {}


def test_b1_b2_vanishes_odd_degree():
    rng = random.Random(2)
    for _ in range(3):
        a = random_support(rng, 3)
        assert all(v == 0 for v in wick_mode_expectations(a, FunctionalKind.B1_DOT_B2).values())


def test_b2_norm_lemma61(lemma61):
    v = _w(lemma61, "b2_norm_sq", 0.5)
    assert v == pytest.approx(691.1776340250328, rel=1e-14)
    assert v > 0


def test_degenerate_supports_zero():
    for name in ("line", "circle25"):
        a = named_profile(name)
        for kind in ("b1_norm_sq", "omega_dot_b2", "b2_norm_sq"):
            assert _w(a, kind, 1.0) == 0.0


def test_exact_rationals(lemma61):
    per_mode = wick_mode_expectations(lemma61, FunctionalKind.B1_NORM_SQ)
    assert all(isinstance(v, Fraction) for v in per_mode.values())


def test_single_pair_by_hand():
    # one pair: Omega = a (g e^{inx} + conj), E||Omega||^2 = 2 a^2 E|g|^2 = 4 a^2
    a = CoefficientSequence({(0, 3): 0.5, (0, -3): 0.5}, 3)
    assert _w(a, "hs_norm_sq", 0) == pytest.approx(4 * 0.25)
    assert _w(a, "b1_norm_sq", 0) == 0.0


def test_support_limits():
    big = named_profile("powerlog", 6)
    assert len(big) > MAX_MODES[DEGREE[FunctionalKind.B2_NORM_SQ]]
    with pytest.raises(SupportTooLarge):
        _w(big, "b2_norm_sq", 0.5)


def test_functional_parse_roundtrip():
    f = Functional.parse("b1_norm_sq:0.5")
    assert f.kind is FunctionalKind.B1_NORM_SQ and f.s == 0.5
    assert Functional.parse(str(f)) == f
