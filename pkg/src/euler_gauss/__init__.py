"""Non-invariance diagnostics for Gaussian measures under the 2D Euler vorticity flow.

Spectral fields on the torus, the Euler bilinear term, the quadratic growth
coefficient gamma_s with an interval-arithmetic positivity certificate, and
Monte Carlo / exact-moment checks of the short-time expansion.
"""

from .bilinear import B1, B2, B3, B3_prime, B3_tilde, biot_savart, bilinear_B, bilinear_coeffs
from .certificate import Certificate, Verdict, certify, gamma_partial_interval, tail_bound
from .flow import NumericalAbort, Trajectory, evolve, remainder_norms, remainder_rhs_check, rk4_step
from .functionals import Functional, FunctionalKind
from .gamma import GammaReport, SupportClass, SupportKind, beta, classify_support, gamma, gamma_consistency
from .interval import Interval, IntervalArray, IntervalDomainError
from .lattice import (
    CoefficientSequence,
    Mode,
    Profile,
    SequenceError,
    SpectralField,
    make_profile,
    named_profile,
    sobolev_norm_sq,
)
from .rng import SamplerConfig, sample
from .stochastic import KAPPA, MCEstimate, expansion_fit, growth_experiment, mc_estimate
from .wick import wick_expectation

__version__ = "0.1.0"

__all__ = [
    "B1", "B2", "B3", "B3_prime", "B3_tilde", "biot_savart", "bilinear_B", "bilinear_coeffs",
    "Certificate", "Verdict", "certify", "gamma_partial_interval", "tail_bound",
    "NumericalAbort", "Trajectory", "evolve", "remainder_norms", "remainder_rhs_check", "rk4_step",
    "Functional", "FunctionalKind",
    "GammaReport", "SupportClass", "SupportKind", "beta", "classify_support", "gamma", "gamma_consistency",
    "Interval", "IntervalArray", "IntervalDomainError",
    "CoefficientSequence", "Mode", "Profile", "SequenceError", "SpectralField", "make_profile",
    "named_profile", "sobolev_norm_sq",
    "SamplerConfig", "sample",
    "KAPPA", "MCEstimate", "expansion_fit", "growth_experiment", "mc_estimate",
    "wick_expectation",
]
