"""Lattice modes, coefficient sequences and truncated spectral fields.

A real vorticity field on the torus is written ``Omega(x) = sum_n c_n e^{i n.x}``
with no 2*pi prefactor; all norms act directly on the ``c_n``. A field with
truncation ``N`` is stored densely on ``[-N, N]^2`` as a complex array indexed
``[n1 + N, n2 + N]``, both halves of the Hermitian pair kept explicitly.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "Mode",
    "Profile",
    "CoefficientSequence",
    "SpectralField",
    "SequenceError",
    "mode_grid",
    "sobolev_norm_sq",
    "h_sigma_norm_sq",
    "make_profile",
    "named_profile",
    "NAMED_PROFILES",
    "embed",
    "hermitian_part",
]


class SequenceError(ValueError):
    """A coefficient sequence or field violates its structural invariants."""


@dataclass(frozen=True, order=True)
class Mode:
    n1: int
    n2: int

    def __post_init__(self):
        object.__setattr__(self, "n1", int(self.n1))
        object.__setattr__(self, "n2", int(self.n2))

    @property
    def norm_sq(self) -> int:
        return self.n1 * self.n1 + self.n2 * self.n2

    @property
    def bracket_sq(self) -> int:
        """<n>^2 = 1 + |n|^2."""
        return 1 + self.norm_sq

    @property
    def perp(self) -> "Mode":
        return Mode(-self.n2, self.n1)

    def dot(self, other: "Mode") -> int:
        return self.n1 * other.n1 + self.n2 * other.n2

    def __add__(self, other: "Mode") -> "Mode":
        return Mode(self.n1 + other.n1, self.n2 + other.n2)

    def __sub__(self, other: "Mode") -> "Mode":
        return Mode(self.n1 - other.n1, self.n2 - other.n2)

    def __neg__(self) -> "Mode":
        return Mode(-self.n1, -self.n2)

    def __bool__(self) -> bool:
        return self.n1 != 0 or self.n2 != 0

    def in_upper_half(self) -> bool:
        """Membership in Z^2_+ = {n1 > 0, or n1 = 0 and n2 >= 0}."""
        return self.n1 > 0 or (self.n1 == 0 and self.n2 >= 0)

    def as_tuple(self) -> tuple[int, int]:
        return (self.n1, self.n2)


class Profile(str, Enum):
    EXPLICIT = "explicit"
    POWER_LOG = "power_log"
    CUSTOM = "custom"


def _as_mode(n) -> Mode:
    return n if isinstance(n, Mode) else Mode(*n)


@dataclass(frozen=True)
class CoefficientSequence:
    """Real symmetric sequence (a_n) with a_0 = 0, stored on its support.

    Zero entries are dropped, so ``support`` is exactly {n : a_n != 0}.
    """

    entries: Mapping[Mode, float]
    radius: int
    profile: Profile = Profile.EXPLICIT
    name: str = ""
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for n, v in self.entries.items():
            n = _as_mode(n)
            v = float(v)
            if not math.isfinite(v):
                raise SequenceError(f"non-finite coefficient at {n.as_tuple()}")
            if v != 0.0:
                clean[n] = v
        if Mode(0, 0) in clean:
            raise SequenceError("a_0 must vanish (mean-zero vorticity)")
        for n, v in clean.items():
            if clean.get(-n) != v:
                raise SequenceError(
                    f"a_(-n) != a_n at n={n.as_tuple()}: mirror mode missing or different"
                )
            if n.norm_sq > self.radius * self.radius:
                raise SequenceError(f"mode {n.as_tuple()} outside radius {self.radius}")
        object.__setattr__(self, "entries", MappingProxyType(dict(sorted(clean.items()))))
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))
        object.__setattr__(self, "profile", Profile(self.profile))

    @classmethod
    def from_half(cls, half: Mapping, radius: int | None = None, **kw) -> "CoefficientSequence":
        """Build from values given on one representative of each pair {n, -n}."""
        entries: dict[Mode, float] = {}
        for n, v in half.items():
            n = _as_mode(n)
            entries[n] = float(v)
            entries[-n] = float(v)
        if radius is None:
            radius = max((math.isqrt(n.norm_sq - 1) + 1 for n in entries), default=1)
        return cls(entries, radius, **kw)

    @property
    def support(self) -> list[Mode]:
        return list(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, n) -> float:
        return self.entries.get(_as_mode(n), 0.0)

    @property
    def max_component(self) -> int:
        """Smallest N such that the support fits in [-N, N]^2."""
        return max((max(abs(n.n1), abs(n.n2)) for n in self.entries), default=0)

    def is_radial(self) -> bool:
        by_shell: dict[int, float] = {}
        for n, v in self.entries.items():
            if by_shell.setdefault(n.norm_sq, v) != v:
                return False
        if not self.entries:
            return True
        # a shell is only radial if every lattice point on it is present
        shells = {n.norm_sq for n in self.entries}
        for r2 in shells:
            r = math.isqrt(r2)
            for i in range(-r, r + 1):
                j2 = r2 - i * i
                j = math.isqrt(j2)
                if j * j == j2 and (Mode(i, j) not in self.entries or Mode(i, -j) not in self.entries):
                    return False
        return True

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(n1, n2, a) as int64/int64/float64 arrays over the support."""
        n1 = np.array([n.n1 for n in self.entries], dtype=np.int64)
        n2 = np.array([n.n2 for n in self.entries], dtype=np.int64)
        a = np.array(list(self.entries.values()), dtype=np.float64)
        return n1, n2, a

    def restricted(self, radius: int) -> "CoefficientSequence":
        """Sub-sequence on 0 < |n| < radius."""
        keep = {n: v for n, v in self.entries.items() if n.norm_sq < radius * radius}
        return CoefficientSequence(keep, max(1, min(self.radius, radius)), self.profile, self.name, self.params)

    def scaled(self, factor: float) -> "CoefficientSequence":
        return CoefficientSequence(
            {n: factor * v for n, v in self.entries.items()}, self.radius, Profile.CUSTOM, self.name
        )

    def to_json(self) -> dict:
        out = {"profile": self.profile.value, "radius": self.radius}
        if self.name:
            out["name"] = self.name
        if self.profile is Profile.POWER_LOG:
            out["params"] = dict(self.params)
        else:
            out["entries"] = [[n.n1, n.n2, v] for n, v in self.entries.items()]
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "CoefficientSequence":
        profile = Profile(obj.get("profile", "explicit"))
        radius = int(obj["radius"])
        if profile is Profile.POWER_LOG:
            return make_profile(profile, obj.get("params", {}), radius, name=obj.get("name", "powerlog"))
        half = {}
        for n1, n2, v in obj.get("entries", []):
            n = Mode(n1, n2)
            if (-n) in half and half[-n] != float(v):
                raise SequenceError(f"inconsistent mirror values at {n.as_tuple()}")
            half[n] = float(v)
        # loader re-derives mirror modes
        entries = dict(half)
        for n, v in half.items():
            entries.setdefault(-n, v)
        return cls(entries, radius, profile, obj.get("name", ""))

    def content_hash(self) -> str:
        payload = json.dumps(
            {"radius": self.radius, "entries": [[n.n1, n.n2, v.hex()] for n, v in self.entries.items()]},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def mode_grid(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Integer wavenumber grids k1, k2 of shape (2N+1, 2N+1)."""
    k = np.arange(-N, N + 1, dtype=np.int64)
    return np.meshgrid(k, k, indexing="ij")


def hermitian_part(c: np.ndarray) -> np.ndarray:
    """Project coefficients onto c_{-n} = conj(c_n) with c_0 = 0 (trailing 2 axes)."""
    out = 0.5 * (c + np.conj(c[..., ::-1, ::-1]))
    N = c.shape[-1] // 2
    out[..., N, N] = 0.0
    return out


def embed(c: np.ndarray, N: int) -> np.ndarray:
    """Zero-pad or crop coefficient arrays (trailing 2 axes) to truncation N."""
    M = c.shape[-1] // 2
    if M == N:
        return c
    if M > N:
        return c[..., M - N : M + N + 1, M - N : M + N + 1]
    out = np.zeros(c.shape[:-2] + (2 * N + 1, 2 * N + 1), dtype=c.dtype)
    out[..., N - M : N + M + 1, N - M : N + M + 1] = c
    return out


class SpectralField:
    """Immutable truncated real field; ``coeffs[n1 + N, n2 + N] = c_n``."""

    __slots__ = ("_c", "truncation")

    def __init__(self, coeffs: np.ndarray, *, check: bool = True, atol: float = 0.0):
        c = np.array(coeffs, dtype=np.complex128)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] % 2 != 1:
            raise SequenceError(f"coefficient array must be (2N+1, 2N+1), got {c.shape}")
        self.truncation = c.shape[0] // 2
        if check:
            _check_hermitian(c, atol)
        c.setflags(write=False)
        self._c = c

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @classmethod
    def zeros(cls, N: int) -> "SpectralField":
        return cls(np.zeros((2 * N + 1, 2 * N + 1), dtype=np.complex128))

    @classmethod
    def from_modes(cls, values: Mapping, N: int | None = None) -> "SpectralField":
        """Field from {mode: c_n}; modes absent from ``values`` whose mirror is
        present are filled with the conjugate."""
        values = {_as_mode(n): complex(v) for n, v in values.items()}
        if N is None:
            N = max((max(abs(n.n1), abs(n.n2)) for n in values), default=0)
        c = np.zeros((2 * N + 1, 2 * N + 1), dtype=np.complex128)
        for n, v in values.items():
            c[n.n1 + N, n.n2 + N] = v
            if -n not in values:
                c[-n.n1 + N, -n.n2 + N] = np.conj(v)
        return cls(c)

    def __getitem__(self, n) -> complex:
        n = _as_mode(n)
        N = self.truncation
        if abs(n.n1) > N or abs(n.n2) > N:
            return 0j
        return complex(self._c[n.n1 + N, n.n2 + N])

    def embed(self, N: int) -> "SpectralField":
        return SpectralField(embed(self._c, N), check=False)

    def support(self) -> list[Mode]:
        N = self.truncation
        idx = np.argwhere(self._c != 0)
        return [Mode(i - N, j - N) for i, j in idx]

    def __add__(self, other: "SpectralField") -> "SpectralField":
        N = max(self.truncation, other.truncation)
        return SpectralField(embed(self._c, N) + embed(other._c, N), check=False)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        N = max(self.truncation, other.truncation)
        return SpectralField(embed(self._c, N) - embed(other._c, N), check=False)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self._c * float(scalar), check=False)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(-self._c, check=False)

    def inner(self, other: "SpectralField", s: float = 0.0) -> float:
        """<self, other>_{H^s} = sum <n>^{2s} c_n conj(d_n) (real for real fields)."""
        N = max(self.truncation, other.truncation)
        a, b = embed(self._c, N), embed(other._c, N)
        return float(np.sum(sobolev_weights(N, s) * (a * np.conj(b)).real))

    def physical(self, L: int | None = None) -> np.ndarray:
        """Complex values on an L x L collocation grid (imaginary part ~ 0)."""
        N = self.truncation
        L = L or 2 * N + 2
        grid = np.zeros((L, L), dtype=np.complex128)
        k = np.arange(-N, N + 1) % L
        grid[np.ix_(k, k)] = self._c
        return np.fft.ifft2(grid) * L * L

    def to_csv_rows(self) -> list[tuple[int, int, float, float]]:
        return [(n.n1, n.n2, self[n].real, self[n].imag) for n in self.support()]

    def __repr__(self) -> str:
        return f"SpectralField(N={self.truncation}, nnz={int(np.count_nonzero(self._c))})"


def _check_hermitian(c: np.ndarray, atol: float) -> None:
    N = c.shape[0] // 2
    if abs(c[N, N]) > atol:
        raise SequenceError("c_0 must vanish (mean-zero vorticity)")
    mirror = np.conj(c[::-1, ::-1])
    if atol == 0.0:
        ok = np.array_equal(c, mirror)
    else:
        ok = np.allclose(c, mirror, rtol=0.0, atol=atol)
    if not ok:
        raise SequenceError("coefficients are not Hermitian: c_{-n} != conj(c_n)")


def sobolev_weights(N: int, s: float) -> np.ndarray:
    k1, k2 = mode_grid(N)
    return (1.0 + k1 * k1 + k2 * k2).astype(np.float64) ** s


def sobolev_norm_sq(f, s: float = 0.0) -> float | np.ndarray:
    """sum_{n != 0} <n>^{2s} |c_n|^2 for a field or a batch of coefficient arrays."""
    c = f.coeffs if isinstance(f, SpectralField) else np.asarray(f)
    N = c.shape[-1] // 2
    w = sobolev_weights(N, s)
    w[N, N] = 0.0
    val = np.sum(w * (c.real**2 + c.imag**2), axis=(-2, -1))
    return float(val) if np.ndim(val) == 0 else val


def h_sigma_norm_sq(a: CoefficientSequence, sigma: float) -> float:
    n1, n2, v = a.arrays()
    if v.size == 0:
        return 0.0
    return math.fsum((1.0 + n1 * n1 + n2 * n2) ** sigma * v * v)


def _power_log_value(norm_sq: int, power: float = 5.0, shift: float = 3.0) -> float:
    b2 = 1.0 + norm_sq
    return 1.0 / (b2 ** (power / 2) * math.log(shift + b2))


def make_profile(kind, params: Mapping | None = None, radius: int = 1, *, name: str = "") -> CoefficientSequence:
    """Construct a sequence.

    ``power_log``: a_n = <n>^{-p} / log(shift + <n>^2) on 0 < |n| <= radius
    (defaults p = 5, shift = 3). ``explicit``: ``params["entries"]`` is an
    iterable of (n1, n2, value) with both members of every pair listed.
    ``custom``: ``params["fn"]`` maps a Mode to a value and is sampled on the disc.
    """
    kind = Profile(kind)
    params = dict(params or {})
    if radius < 1:
        raise SequenceError("radius must be >= 1")
    if kind is Profile.POWER_LOG:
        p = float(params.get("power", 5.0))
        shift = float(params.get("shift", 3.0))
        entries = {}
        for i in range(-radius, radius + 1):
            for j in range(-radius, radius + 1):
                r2 = i * i + j * j
                if 0 < r2 <= radius * radius:
                    entries[Mode(i, j)] = _power_log_value(r2, p, shift)
        return CoefficientSequence(entries, radius, kind, name or "powerlog", {"power": p, "shift": shift})
    if kind is Profile.EXPLICIT:
        entries = {}
        for n1, n2, v in params.get("entries", []):
            entries[Mode(n1, n2)] = float(v)
        return CoefficientSequence(entries, radius, kind, name)
    fn = params["fn"]
    entries = {}
    for i in range(-radius, radius + 1):
        for j in range(-radius, radius + 1):
            n = Mode(i, j)
            if 0 < n.norm_sq <= radius * radius:
                entries[n] = float(fn(n))
    return CoefficientSequence(entries, radius, kind, name)


def _lemma61() -> CoefficientSequence:
    return make_profile(
        "explicit", {"entries": [(1, 0, 1.0), (-1, 0, 1.0), (0, 2, 1.0), (0, -2, 1.0)]}, 2, name="lemma61"
    )


def _line() -> CoefficientSequence:
    ent = []
    for k in (1, 2, 3):
        ent += [(k, 0, 1.0 / k), (-k, 0, 1.0 / k)]
    return make_profile("explicit", {"entries": ent}, 3, name="line")


def _circle25() -> CoefficientSequence:
    pts = [(3, 4), (4, 3), (5, 0), (0, 5)]
    ent = []
    for i, j in pts:
        for si in (1, -1):
            for sj in (1, -1):
                ent.append((si * i, sj * j, 1.0))
    ent = list({(a, b, v) for a, b, v in ent})
    return make_profile("explicit", {"entries": ent}, 5, name="circle25")


def _gibbs_like(radius: int = 8) -> CoefficientSequence:
    return make_profile("custom", {"fn": lambda n: 1.0 / n.bracket_sq}, radius, name="gibbs-like")


NAMED_PROFILES = ("lemma61", "powerlog", "line", "circle25", "gibbs-like")


def named_profile(name: str, radius: int | None = None) -> CoefficientSequence:
    """Built-in sequences; ``radius`` applies to powerlog (default 10) and gibbs-like (default 8)."""
    if name == "lemma61":
        return _lemma61()
    if name == "powerlog":
        return make_profile("power_log", {}, radius or 10, name="powerlog")
    if name == "line":
        return _line()
    if name == "circle25":
        return _circle25()
    if name == "gibbs-like":
        return _gibbs_like(radius or 8)
    raise KeyError(f"unknown profile {name!r}; choose from {', '.join(NAMED_PROFILES)}")


def support_modes(modes: Iterable) -> list[Mode]:
    return sorted(_as_mode(n) for n in modes)
