"""Names of the random functionals shared by the Monte Carlo and exact paths."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

__all__ = ["FunctionalKind", "Functional", "DEGREE"]


class FunctionalKind(str, Enum):
    HS_NORM_SQ = "hs_norm_sq"          # ||Omega||^2
    OMEGA_DOT_B1 = "omega_dot_b1"      # <Omega, B1>
    B1_NORM_SQ = "b1_norm_sq"          # ||B1||^2
    OMEGA_DOT_B2 = "omega_dot_b2"      # <Omega, B2>
    B1_DOT_B2 = "b1_dot_b2"            # <B1, B2>
    B2_NORM_SQ = "b2_norm_sq"          # ||B2||^2


# polynomial degree in the Gaussian variables
DEGREE = {
    FunctionalKind.HS_NORM_SQ: 2,
    FunctionalKind.OMEGA_DOT_B1: 3,
    FunctionalKind.B1_NORM_SQ: 4,
    FunctionalKind.OMEGA_DOT_B2: 4,
    FunctionalKind.B1_DOT_B2: 5,
    FunctionalKind.B2_NORM_SQ: 6,
}


@dataclass(frozen=True)
class Functional:
    kind: FunctionalKind
    s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", FunctionalKind(self.kind))
        object.__setattr__(self, "s", float(self.s))

    @classmethod
    def parse(cls, text: str) -> "Functional":
        """``"b1_norm_sq"`` or ``"b1_norm_sq:0.5"``."""
        name, _, s = text.partition(":")
        return cls(FunctionalKind(name.strip()), float(s) if s else 0.0)

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.s:g}"
