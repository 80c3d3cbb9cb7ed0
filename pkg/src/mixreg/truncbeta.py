"""Moments and sampling for the symmetric Beta distribution truncated to [1/2, 1].

Mixing weights are drawn from Beta(alpha, alpha). Folding a draw about 1/2,
``theta = max(lam, 1 - lam)``, yields a Beta(alpha, alpha) variable truncated
to [1/2, 1]; by symmetry the fold is exact, so no rejection step is needed.
Every closed-form quantity downstream (data shrinkage, perturbation
covariances, the test-time rescaling) is a function of the first two moments
of theta, which reduce to regularized incomplete beta functions:

    E[theta]   = 1 - I(1/2; alpha + 1, alpha)
    E[theta^2] = (alpha + 1) / (2 alpha + 1) * (1 - I(1/2; alpha + 2, alpha))

where I(x; a, b) is the regularized incomplete beta function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

__all__ = [
    "MixCoefficients",
    "trunc_beta_mean",
    "trunc_beta_raw_moment",
    "mix_coefficients",
    "sample_theta",
]

# Variance of any distribution supported on an interval of length 1/2 is at
# most (1/2)^2 / 4; used as a sanity bound on sigma_sq.
_MAX_SIGMA_SQ = 1.0 / 16.0
_INVARIANT_TOL = 1e-12


def _validate_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0.0:
        raise ValueError(f"alpha must be a finite positive real, got {alpha!r}")
    return alpha


@dataclass(frozen=True)
class MixCoefficients:
    """Scalar summary of the truncated mixing distribution.

    theta_bar is the mean, sigma_sq the variance, and gamma_sq the second
    moment of (1 - theta), i.e. gamma_sq = sigma_sq + (1 - theta_bar)^2.
    """

    alpha: float
    theta_bar: float
    sigma_sq: float
    gamma_sq: float

    def __post_init__(self) -> None:
        if not 0.5 - _INVARIANT_TOL <= self.theta_bar <= 1.0 + _INVARIANT_TOL:
            raise ValueError(f"theta_bar outside [1/2, 1]: {self.theta_bar}")
        if not -_INVARIANT_TOL <= self.sigma_sq <= _MAX_SIGMA_SQ + _INVARIANT_TOL:
            raise ValueError(f"sigma_sq outside [0, 1/16]: {self.sigma_sq}")
        expected = self.sigma_sq + (1.0 - self.theta_bar) ** 2
        if abs(self.gamma_sq - expected) > 1e-10:
            raise ValueError("gamma_sq != sigma_sq + (1 - theta_bar)^2")


def trunc_beta_mean(alpha: float) -> float:
    """Mean of Beta(alpha, alpha) truncated to [1/2, 1].

    Decreases strictly from 1 (alpha -> 0) to 1/2 (alpha -> infinity);
    equals 3/4 at alpha = 1.
    """
    alpha = _validate_alpha(alpha)
    return 1.0 - float(betainc(alpha + 1.0, alpha, 0.5))


def trunc_beta_raw_moment(alpha: float, k: int) -> float:
    """Raw moment E[theta^k] of the truncated variable, k in {1, 2}."""
    alpha = _validate_alpha(alpha)
    if k == 1:
        return trunc_beta_mean(alpha)
    if k == 2:
        ratio = (alpha + 1.0) / (2.0 * alpha + 1.0)
        return ratio * (1.0 - float(betainc(alpha + 2.0, alpha, 0.5)))
    raise ValueError(f"raw moment only defined for k in {{1, 2}}, got {k}")


def mix_coefficients(alpha: float) -> MixCoefficients:
    """Assemble (theta_bar, sigma_sq, gamma_sq) for a given alpha."""
    theta_bar = trunc_beta_mean(alpha)
    second = trunc_beta_raw_moment(alpha, 2)
    sigma_sq = max(second - theta_bar * theta_bar, 0.0)
    gamma_sq = sigma_sq + (1.0 - theta_bar) ** 2
    return MixCoefficients(
        alpha=float(alpha), theta_bar=theta_bar, sigma_sq=sigma_sq, gamma_sq=gamma_sq
    )


def sample_theta(alpha: float, rng: np.random.Generator, size: int | None = None):
    """Draw from Beta(alpha, alpha) truncated to [1/2, 1].

    Draws lam ~ Beta(alpha, alpha) and returns max(lam, 1 - lam), which is
    exact by the symmetry of the base distribution about 1/2. Deterministic
    given the generator state. Returns a scalar when ``size`` is None.
    """
    alpha = _validate_alpha(alpha)
    lam = rng.beta(alpha, alpha, size=size)
    folded = np.maximum(lam, 1.0 - lam)
    if size is None:
        return float(folded)
    return folded
