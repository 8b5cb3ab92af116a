"""Euler nonlinearity in Fourier space.

``B(a, b) = 1/2 U[a].grad b + 1/2 U[b].grad a`` with Biot-Savart velocity
``u1_n = -n2/(i|n|^2) c_n``, ``u2_n = n1/(i|n|^2) c_n``. In coefficients,

    B(a, b)_n = 1/2 sum_{k+m=n} (m . k_perp) (1/|k|^2 - 1/|m|^2) a_k b_m,

terms with k = 0 or m = 0 skipped. Two evaluation routes are provided: a
direct convolution and an FFT product on a zero-padded grid large enough that
the quadratic term is alias-free before the sharp square cutoff.

All array functions act on the trailing two axes, so a leading batch axis
(ensembles of samples) is supported throughout.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .lattice import SpectralField, embed, hermitian_part, mode_grid

__all__ = [
    "VelocityField",
    "biot_savart",
    "bilinear_B",
    "bilinear_coeffs",
    "B1",
    "B2",
    "B3",
    "B3_prime",
    "B3_tilde",
    "B1_coeffs",
    "B2_coeffs",
    "padded_length",
]


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("EULER_GAUSS_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class VelocityField:
    u1: np.ndarray
    u2: np.ndarray

    @property
    def truncation(self) -> int:
        return self.u1.shape[-1] // 2

    def divergence(self) -> np.ndarray:
        k1, k2 = mode_grid(self.truncation)
        return k1 * self.u1 + k2 * self.u2

    def curl(self) -> np.ndarray:
        k1, k2 = mode_grid(self.truncation)
        return 1j * (k1 * self.u2 - k2 * self.u1)


def _inv_norm_sq(N: int) -> np.ndarray:
    k1, k2 = mode_grid(N)
    r2 = (k1 * k1 + k2 * k2).astype(np.float64)
    r2[N, N] = np.inf
    return 1.0 / r2


def velocity_coeffs(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    N = c.shape[-1] // 2
    k1, k2 = mode_grid(N)
    inv = _inv_norm_sq(N)
    # -n2/(i|n|^2) = i n2/|n|^2
    return 1j * k2 * inv * c, -1j * k1 * inv * c


def biot_savart(omega: SpectralField) -> VelocityField:
    u1, u2 = velocity_coeffs(omega.coeffs)
    return VelocityField(u1, u2)


def padded_length(n_a: int, n_b: int, n_out: int) -> int:
    """Grid size that keeps modes |n_i| <= n_out of an (n_a, n_b) product alias-free."""
    return sfft.next_fast_len(n_a + n_b + n_out + 1, real=True)


def _to_grid(c: np.ndarray, L: int) -> np.ndarray:
    """Scatter coefficients into the rfft half-spectrum of an L x L grid."""
    N = c.shape[-1] // 2
    out = np.zeros(c.shape[:-2] + (L, L // 2 + 1), dtype=np.complex128)
    rows = np.arange(-N, N + 1) % L
    out[..., rows, : N + 1] = c[..., :, N:]
    return out


def _from_grid(h: np.ndarray, L: int, N: int) -> np.ndarray:
    rows = np.arange(-N, N + 1) % L
    right = h[..., rows, : N + 1]
    out = np.empty(h.shape[:-2] + (2 * N + 1, 2 * N + 1), dtype=np.complex128)
    out[..., :, N:] = right
    # left half from Hermitian symmetry: c_{(n1, -n2)} = conj(c_{(-n1, n2)})
    out[..., :, :N] = np.conj(right[..., ::-1, 1:][..., ::-1])
    return out


def _physical(c_half: np.ndarray, L: int, workers: int) -> np.ndarray:
    return sfft.irfft2(c_half, s=(L, L), workers=workers) * (L * L)


def _bilinear_fft(a: np.ndarray, b: np.ndarray, n_out: int) -> np.ndarray:
    Na, Nb = a.shape[-1] // 2, b.shape[-1] // 2
    L = padded_length(Na, Nb, n_out)
    w = _workers()

    def parts(c):
        N = c.shape[-1] // 2
        k1, k2 = mode_grid(N)
        u1, u2 = velocity_coeffs(c)
        return (
            _physical(_to_grid(u1, L), L, w),
            _physical(_to_grid(u2, L), L, w),
            _physical(_to_grid(1j * k1 * c, L), L, w),
            _physical(_to_grid(1j * k2 * c, L), L, w),
        )

    ua1, ua2, ga1, ga2 = parts(a)
    if b is a:
        prod = ua1 * ga1 + ua2 * ga2
    else:
        ub1, ub2, gb1, gb2 = parts(b)
        # (X + Y) == (Y + X) bitwise, so B(a, b) == B(b, a) exactly
        prod = 0.5 * ((ua1 * gb1 + ua2 * gb2) + (ub1 * ga1 + ub2 * ga2))
    spectrum = sfft.rfft2(prod, workers=w) / (L * L)
    return _from_grid(spectrum, L, n_out)


def _kernel_row(k1: int, k2: int, N: int) -> np.ndarray:
    """1/2 (m . k_perp)(1/|k|^2 - 1/|m|^2) over the m grid of truncation N.

    Exactly symmetric in (k, m) and exactly zero when m is parallel to k or
    |m| = |k|, so degenerate supports produce exact zeros.
    """
    m1, m2 = mode_grid(N)
    r2 = (m1 * m1 + m2 * m2).astype(np.float64)
    r2[N, N] = np.inf
    cross = (-k2 * m1 + k1 * m2).astype(np.float64)
    return 0.5 * cross * (1.0 / (k1 * k1 + k2 * k2) - 1.0 / r2)


def _convolve_direct(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Untruncated sum_{k+m=n} K(k, m) a_k b_m, looping over the support of a."""
    Na, Nb = a.shape[-1] // 2, b.shape[-1] // 2
    Nf = Na + Nb
    shape = np.broadcast_shapes(a.shape[:-2], b.shape[:-2]) + (2 * Nf + 1, 2 * Nf + 1)
    full = np.zeros(shape, dtype=np.complex128)
    nz = np.argwhere(np.any(a.reshape(-1, 2 * Na + 1, 2 * Na + 1) != 0, axis=0))
    for i, j in nz:
        k1, k2 = int(i) - Na, int(j) - Na
        if k1 == 0 and k2 == 0:
            continue
        # n = k + m sits at index n + Nf = (m + Nb) + (k + Nf - Nb)
        r0, c0 = k1 + Nf - Nb, k2 + Nf - Nb
        full[..., r0 : r0 + 2 * Nb + 1, c0 : c0 + 2 * Nb + 1] += (
            _kernel_row(k1, k2, Nb) * a[..., i, j, None, None] * b
        )
    return full


def _bilinear_direct(a: np.ndarray, b: np.ndarray, n_out: int) -> np.ndarray:
    if a is b:
        return embed(_convolve_direct(a, a), n_out)
    # both orders agree mathematically; averaging makes B(a, b) == B(b, a) bitwise
    return embed(0.5 * (_convolve_direct(a, b) + _convolve_direct(b, a)), n_out)


def bilinear_coeffs(a: np.ndarray, b: np.ndarray, n_out: int | None = None, method: str = "fft") -> np.ndarray:
    """Coefficients of B(a, b) truncated to |n_i| <= n_out (default: max input truncation)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if n_out is None:
        n_out = max(a.shape[-1], b.shape[-1]) // 2
    if method == "fft":
        out = _bilinear_fft(a, b, n_out)
    elif method == "direct":
        out = _bilinear_direct(a, b, n_out)
    else:
        raise ValueError(f"unknown method {method!r}")
    return hermitian_part(out)


def bilinear_B(a: SpectralField, b: SpectralField, out_truncation: int | None = None, method: str = "fft") -> SpectralField:
    coeffs = bilinear_coeffs(a.coeffs, b.coeffs if b is not a else a.coeffs, out_truncation, method)
    return SpectralField(coeffs, check=False)


def _out(N: int, grow: bool, order: int) -> int:
    return N * order if grow else N


def B1_coeffs(c: np.ndarray, grow: bool = False, method: str = "fft") -> np.ndarray:
    N = c.shape[-1] // 2
    return bilinear_coeffs(c, c, _out(N, grow, 2), method)


def B2_coeffs(c: np.ndarray, b1: np.ndarray | None = None, grow: bool = False, method: str = "fft") -> np.ndarray:
    N = c.shape[-1] // 2
    if b1 is None:
        b1 = B1_coeffs(c, grow, method)
    return bilinear_coeffs(c, b1, _out(N, grow, 3), method)


def B1(omega: SpectralField, grow: bool = False, method: str = "fft") -> SpectralField:
    """B(Omega, Omega); ``grow`` keeps every generated mode instead of the input cutoff."""
    return SpectralField(B1_coeffs(omega.coeffs, grow, method), check=False)


def B2(omega: SpectralField, grow: bool = False, method: str = "fft") -> SpectralField:
    return SpectralField(B2_coeffs(omega.coeffs, None, grow, method), check=False)


def B3(omega: SpectralField, grow: bool = False, method: str = "fft") -> SpectralField:
    c = omega.coeffs
    N = c.shape[-1] // 2
    b1 = B1_coeffs(c, grow, method)
    b2 = B2_coeffs(c, b1, grow, method)
    n_out = _out(N, grow, 4)
    return SpectralField(
        bilinear_coeffs(b1, b1, n_out, method) + 2.0 * bilinear_coeffs(c, b2, n_out, method), check=False
    )


def B3_prime(omega: SpectralField, grow: bool = False, method: str = "fft") -> SpectralField:
    c = omega.coeffs
    N = c.shape[-1] // 2
    b1 = B1_coeffs(c, grow, method)
    b2 = B2_coeffs(c, b1, grow, method)
    return SpectralField(bilinear_coeffs(b1, b2, _out(N, grow, 5), method), check=False)


def B3_tilde(omega: SpectralField, grow: bool = False, method: str = "fft") -> SpectralField:
    c = omega.coeffs
    N = c.shape[-1] // 2
    b2 = B2_coeffs(c, None, grow, method)
    return SpectralField(bilinear_coeffs(b2, b2, _out(N, grow, 6), method), check=False)


def field_to_csv(field: SpectralField, path) -> None:
    """Debug dump: rows (n1, n2, re, im) over the nonzero modes."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n1", "n2", "re", "im"])
        for row in field.to_csv_rows():
            w.writerow([row[0], row[1], repr(row[2]), repr(row[3])])
