import math
import random
from fractions import Fraction

import pytest

from euler_gauss.gamma import (
    FOURIER_PREFACTOR,
    PrefactorMode,
    SupportKind,
    beta,
    classify_support,
    degenerate_pair,
    expected_B1_normsq_closed,
    expected_omega_B2_closed,
    gamma,
    gamma_consistency,
    gamma_term,
    scan_s,
)
from euler_gauss.lattice import CoefficientSequence, Mode, make_profile, named_profile

from conftest import random_support


def _exact_gamma(a: CoefficientSequence, s: int) -> Fraction:
    """Literal double sum in rationals (integer s only)."""
    total = Fraction(0)
    for n in a.support:
        for q in a.support:
            p = n + q
            if not p:
                continue
            cross = q.n1 * (-n.n2) + q.n2 * n.n1
            N2, Q2, P2 = n.norm_sq, q.norm_sq, p.norm_sq
            b = (
                (1 + N2) ** s * (Fraction(1, Q2) - Fraction(1, P2))
                + (1 + Q2) ** s * (Fraction(1, P2) - Fraction(1, N2))
                + (1 + P2) ** s * (Fraction(1, N2) - Fraction(1, Q2))
            )
            w = Fraction(a[n]) ** 2 * Fraction(a[q]) ** 2
            total += w * Fraction(cross * cross, 2) * (Fraction(1, N2) - Fraction(1, Q2)) * b
    return total


def _form_a(s):
    return 3 * (6**s / 2 + 3 * 2**s / 10 - 4 * 3**s / 5)


def _form_b(s):
    return 3 / 20 * (15 * 6**s - 16 * 5**s + 2**s)


def test_beta_example():
    assert beta(Mode(1, 0), Mode(0, 2), 1) == pytest.approx(0.6, abs=1e-15)


def test_beta_zero_at_s0():
    for n, q in [((1, 0), (0, 2)), ((3, -1), (2, 5)), ((1, 1), (-4, 2))]:
        assert beta(Mode(*n), Mode(*q), 0) == 0.0


def test_beta_q_equals_n():
    for s in (0.5, 1, 2.5):
        assert beta(Mode(2, 1), Mode(2, 1), s) == pytest.approx(0.0, abs=1e-12)


def test_beta_antisymmetric():
    n, q = Mode(1, 2), Mode(-3, 1)
    assert beta(q, n, 1.3) == -beta(n, q, 1.3)


def test_gamma_term_zeros(lemma61):
    a = make_profile("power_log", {}, 5)
    assert gamma_term(a, Mode(1, 0), Mode(3, 0), 1.0) == 0.0
    assert gamma_term(a, Mode(3, 4), Mode(5, 0), 1.0) == 0.0
    assert gamma_term(a, Mode(1, 2), Mode(-1, -2), 1.0) == 0.0
    assert gamma_term(lemma61, Mode(1, 0), Mode(0, 2), 1.0) != 0.0


@pytest.mark.parametrize("name", ["line", "circle25"])
@pytest.mark.parametrize("s", [0, 0.5, 1, 1.5, 2, 3])
def test_degenerate_gamma_exact_zero(name, s):
    a = named_profile(name)
    assert gamma(a, s).gamma_bare == 0.0
    assert expected_B1_normsq_closed(a, s) == 0.0
    assert expected_omega_B2_closed(a, s) == 0.0
    assert gamma_consistency(a, s) == (0.0, 0.0)


@pytest.mark.parametrize("s", [1, 2, 3])
def test_lemma61_against_rational_oracle(lemma61, s):
    exact = _exact_gamma(lemma61, s)
    assert gamma(lemma61, s).gamma_bare == pytest.approx(float(exact), rel=1e-14)
    # the oracle agrees with 4x closed form B, not form A
    assert exact == 4 * Fraction(3, 20) * (15 * 6**s - 16 * 5**s + 2**s)


def test_lemma61_candidate_closed_forms(lemma61):
    g = gamma(lemma61, 2).gamma_bare
    assert g == pytest.approx(86.4, rel=1e-14)
    assert _form_b(2) == pytest.approx(21.6)
    assert _form_a(2) == pytest.approx(36.0)
    assert g == pytest.approx(4 * _form_b(2), rel=1e-14)
    assert g / _form_a(2) != pytest.approx(4.0)
    ratios = [gamma(lemma61, s).gamma_bare / _form_a(s) for s in (1.5, 2, 3)]
    assert max(ratios) - min(ratios) > 0.1


def test_random_support_rational_oracle():
    rng = random.Random(4)
    for _ in range(10):
        a = random_support(rng, rng.randint(1, 5))
        for s in (1, 2):
            assert gamma(a, s).gamma_bare == pytest.approx(float(_exact_gamma(a, s)), rel=1e-12, abs=1e-12)


def test_s0_is_exactly_zero(corpus):
    for a in corpus:
        assert gamma(a, 0).gamma_bare == 0.0


@pytest.mark.parametrize("s", [0.5, 1, 2])
def test_consistency_corpus(corpus, s):
    for a in corpus:
        lhs, rhs = gamma_consistency(a, s)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12), a.name


def test_consistency_powerlog_radius10():
    a = named_profile("powerlog", 10)
    lhs, rhs = gamma_consistency(a, 0.5)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_omega_b2_single_pair():
    a = CoefficientSequence({(2, 1): 0.7, (-2, -1): 0.7}, 3)
    for s in (0, 0.5, 4):
        assert expected_omega_B2_closed(a, s) == 0.0


def test_b1_closed_positive(lemma61):
    assert expected_B1_normsq_closed(lemma61, 0) > 0


def test_summation_radius_truncates():
    a = named_profile("powerlog", 10)
    g5 = gamma(a, 0.5, summation_radius=5)
    assert g5.partial_radius == 5
    inner = CoefficientSequence({n.as_tuple(): a[n] for n in a.support if n.norm_sq < 25}, 5)
    assert g5.gamma_bare == pytest.approx(gamma(inner, 0.5).gamma_bare, rel=1e-13)
    assert gamma(a, 0.5).partial_radius == "exact-finite-support"


def test_prefactor(lemma61):
    r = gamma(lemma61, 2)
    assert r.value(PrefactorMode.PAPER) == r.gamma_bare * FOURIER_PREFACTOR
    assert FOURIER_PREFACTOR == 1 / (2 * math.pi) ** 4
    assert r.value("bare") == r.gamma_bare


def test_sign_invariance(lemma61):
    assert gamma(lemma61.scaled(-1.0), 1.5).gamma_bare == gamma(lemma61, 1.5).gamma_bare


def test_homogeneity(lemma61):
    assert gamma(lemma61.scaled(2.0), 1.5).gamma_bare == pytest.approx(16 * gamma(lemma61, 1.5).gamma_bare)


def test_continuity_in_s(lemma61):
    s_vals = [1.0 + 0.01 * k for k in range(11)]
    g = [gamma(lemma61, s).gamma_bare for s in s_vals]
    steps = [abs(b - a) for a, b in zip(g, g[1:])]
    assert max(steps) < 0.05 * max(abs(x) for x in g)


def test_degenerate_pair_examples():
    assert degenerate_pair(Mode(1, 0), Mode(3, 0))
    assert degenerate_pair(Mode(3, 4), Mode(5, 0))
    assert not degenerate_pair(Mode(1, 0), Mode(0, 2))


def test_classify_examples(lemma61):
    line = CoefficientSequence({(2, 0): 1, (-2, 0): 1, (1, 0): 1, (-1, 0): 1}, 2)
    c = classify_support(line)
    assert c.kind is SupportKind.LINE and c.direction == Mode(1, 0)
    circ = {}
    for n in [(3, 4), (4, 3), (5, 0), (0, 5)]:
        circ[n] = circ[(-n[0], -n[1])] = 1.0
    c = classify_support(CoefficientSequence(circ, 5))
    assert c.kind is SupportKind.CIRCLE and c.radius_sq == 25
    assert c.to_json() == {"kind": "Circle", "radius_sq": 25}
    assert classify_support(lemma61).kind is SupportKind.NON_DEGENERATE
    assert classify_support(CoefficientSequence({}, 1)).kind is SupportKind.EMPTY


def test_line_direction_primitive():
    a = CoefficientSequence({(2, -4): 1, (-2, 4): 1, (1, -2): 1, (-1, 2): 1}, 5)
    assert classify_support(a).direction == Mode(1, -2)


def test_scan_lemma61(lemma61):
    r = scan_s(lemma61, [1.5, 2, 3])
    assert all(g > 0 for _, g in r.values)
    assert r.flagged == 1.5


def test_scan_line_and_zero():
    r = scan_s(named_profile("line"), [0.5, 1, 2])
    assert all(g == 0 for _, g in r.values) and r.flagged is None
    r = scan_s(named_profile("lemma61"), [0, 2])
    assert r.values[0] == (0.0, 0.0) and r.flagged == 2.0


def test_scan_empty_grid():
    with pytest.raises(ValueError):
        scan_s(named_profile("lemma61"), [])
