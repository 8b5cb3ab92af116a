import csv

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from euler_gauss.bilinear import bilinear_coeffs
from euler_gauss.flow import (
    NumericalAbort,
    energy,
    enstrophy,
    evolve,
    evolve_batch,
    integrate,
    remainder_norms,
    remainder_rhs_check,
    remainder_slope,
    rk4_step,
)
from euler_gauss.lattice import SpectralField, embed, hermitian_part, named_profile


def _field(name, N):
    a = named_profile(name)
    return SpectralField.from_modes({n.as_tuple(): a[n] for n in a.support}, N)


def _grid(t_max=0.05, count=51):
    return [float(t) for t in np.linspace(0.0, t_max, count)]


@pytest.fixture(scope="module")
def lemma_traj():
    return evolve(_field("lemma61", 16), _grid(), 1e-3)


@pytest.mark.parametrize("name", ["line", "circle25"])
def test_stationary_step_exact(name):
    om = _field(name, 8)
    assert np.array_equal(rk4_step(om, 1e-2).coeffs, om.coeffs)


@pytest.mark.parametrize("name", ["line", "circle25"])
def test_stationary_trajectory(name):
    om = _field(name, 8)
    traj = evolve(om, _grid(0.05, 6), 1e-3)
    assert all(np.array_equal(s.coeffs, om.coeffs) for s in traj.states)
    assert all(w == 0.0 for _, w in remainder_norms(traj, 0.5))
    assert remainder_rhs_check(traj) == 0.0


def test_single_time():
    om = _field("lemma61", 4)
    traj = evolve(om, [0.0], 1e-3)
    assert len(traj.states) == 1 and np.array_equal(traj.initial.coeffs, om.coeffs)


def test_conservation(lemma_traj):
    z0, e0 = enstrophy(lemma_traj.initial.coeffs), energy(lemma_traj.initial.coeffs)
    for st in lemma_traj.states:
        assert abs(enstrophy(st.coeffs) - z0) <= 1e-8 * z0
        assert abs(energy(st.coeffs) - e0) <= 1e-8 * e0


def test_remainder_zero_at_start(lemma_traj):
    assert remainder_norms(lemma_traj, 0.5)[0] == (0.0, 0.0)


def test_remainder_cubic(lemma_traj):
    assert remainder_slope(lemma_traj, 0.5) == pytest.approx(3.0, abs=0.05)


def test_rhs_residual_second_order():
    om = _field("lemma61", 8)
    r1 = remainder_rhs_check(evolve(om, _grid(0.05, 11), 5e-4))
    r2 = remainder_rhs_check(evolve(om, _grid(0.05, 21), 5e-4))
    assert 3.0 < r1 / r2 < 5.0


def test_rhs_residual_coarse_is_finite():
    om = SpectralField.from_modes({(1, 0): 1.0, (0, 2): 0.5}, 4)
    r = remainder_rhs_check(evolve(om, _grid(0.2, 5), 1e-2))
    assert np.isfinite(r) and r > 0


def test_against_scipy_oracle():
    # independent adaptive integration of the same Galerkin system
    N = 4
    c0 = _field("lemma61", N).coeffs
    shape = c0.shape

    def f(_, y):
        c = (y[: y.size // 2] + 1j * y[y.size // 2 :]).reshape(shape)
        d = -bilinear_coeffs(c, c, N, method="fft")
        return np.concatenate([d.real.ravel(), d.imag.ravel()])

    y0 = np.concatenate([c0.real.ravel(), c0.imag.ravel()])
    sol = solve_ivp(f, (0.0, 0.05), y0, method="DOP853", rtol=1e-13, atol=1e-15)
    ref = (sol.y[: y0.size // 2, -1] + 1j * sol.y[y0.size // 2 :, -1]).reshape(shape)
    ours = evolve(SpectralField(c0), [0.0, 0.05], 1e-3).states[-1].coeffs
    assert np.max(np.abs(ours - ref)) < 1e-11


def test_time_reversal():
    c0 = _field("lemma61", 8).coeffs
    fwd = integrate(c0, 0.03, 1e-3)
    back = integrate(fwd, -0.03, 1e-3)
    assert np.max(np.abs(back - c0)) < 1e-12


def test_antithetic_symmetry():
    # -Omega(-t) solves the same equation
    c0 = _field("lemma61", 8).coeffs
    a = integrate(c0, 0.02, 1e-3)
    b = integrate(-c0, -0.02, 1e-3)
    np.testing.assert_allclose(a, -b, atol=1e-14)


def test_batch_matches_single():
    rng = np.random.default_rng(0)
    batch = []
    for _ in range(3):
        c = hermitian_part(rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9)))
        c[4, 4] = 0
        batch.append(c)
    batch = np.stack(batch)
    out = evolve_batch(batch, [0.0, 0.01], 1e-3)
    for k in range(3):
        single = evolve_batch(batch[k], [0.0, 0.01], 1e-3)
        np.testing.assert_allclose(out[:, k], single, atol=1e-14)


def test_solution_stays_truncated():
    c0 = _field("lemma61", 3).coeffs
    out = integrate(c0, 0.05, 1e-3)
    assert out.shape == c0.shape
    assert np.array_equal(out, hermitian_part(out))


def test_grid_validation():
    om = _field("lemma61", 4)
    with pytest.raises(ValueError):
        evolve(om, [0.0, 0.0015], 1e-3)
    with pytest.raises(ValueError):
        evolve(om, [0.01, 0.02], 1e-3)
    with pytest.raises(ValueError):
        evolve(om, [0.0, 0.02, 0.01], 1e-3)
    with pytest.raises(ValueError):
        rk4_step(om, -1e-3)


def test_blowup_guard():
    om = _field("lemma61", 6) * 1e3
    with pytest.raises(NumericalAbort):
        evolve(om, [0.0, 1.0], 0.5)


def test_csv_outputs(tmp_path, lemma_traj):
    lemma_traj.to_csv(tmp_path / "traj.csv")
    lemma_traj.summary_csv(tmp_path / "summary.csv", s=0.5)
    with open(tmp_path / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(lemma_traj.times)
    assert set(rows[0]) >= {"t", "enstrophy", "energy"}
    with open(tmp_path / "traj.csv") as fh:
        header = next(csv.reader(fh))
    assert header == ["t", "n1", "n2", "re", "im"]


def test_embedding_commutes_for_stationary():
    om = _field("circle25", 5)
    big = embed(om.coeffs, 9)
    assert np.array_equal(integrate(big, 0.01, 1e-3), big)
