"""Acceptance-level calibration of the p-value model.

A test p-value is uniform on (0, 1] when no change is present. When a
change is present it is modeled as Beta(gamma, 1), the decreasing-density
Lehmann alternative. The shape gamma is tied to an acceptance level alpha
by requiring the two densities to cross exactly at alpha:

    gamma * alpha**(gamma - 1) = 1,

which has a unique root in (0, 1) for alpha in (0, 1/e). At alpha >= 1/e
the alternative collapses onto the uniform and the model cannot separate
the hypotheses, so such levels are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

ALPHA_MAX = math.exp(-1.0)

# Floor applied before taking logs of p-values; exact/normal p-values can
# underflow and log(0) would poison log-domain arithmetic.
P_FLOOR = 1e-300


class CalibrationError(ValueError):
    """Raised when an acceptance level admits no informative calibration."""


def solve_gamma(alpha: float) -> float:
    """Root of gamma * alpha**(gamma-1) = 1 in (0, 1).

    Solved as g(gamma) = ln(gamma) + (gamma - 1) ln(alpha) = 0 on
    (0, gamma_star) with gamma_star = -1/ln(alpha) the maximizer of g;
    the trivial root gamma = 1 lies beyond gamma_star and is excluded.
    """
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if alpha >= ALPHA_MAX:
        raise CalibrationError(
            f"alpha must be below 1/e ~= {ALPHA_MAX:.6f}; at {alpha} the "
            "change/no-change densities cannot be separated"
        )
    log_alpha = math.log(alpha)
    gamma_star = -1.0 / log_alpha

    def g(gamma: float) -> float:
        return math.log(gamma) + (gamma - 1.0) * log_alpha

    # g(alpha) = alpha*ln(alpha) < 0 always brackets the root from below.
    lo = alpha
    hi = gamma_star * (1.0 - 1e-12)
    if g(hi) <= 0.0:
        # Only near alpha ~ 1/e, where root and maximizer coincide at 1
        # within floating precision; hi already satisfies the residual.
        return hi
    return float(brentq(g, lo, hi, xtol=1e-15, rtol=8.9e-16))


def log_density_p(p: float, r: int, gamma: float) -> float:
    """Log marginal density of one p-value given its change indicator.

    Uniform (log density 0) for r = 0; ln(gamma) + (gamma - 1) ln(p) for
    r = 1. p is floored at P_FLOOR before the log.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p-value must lie in (0, 1], got {p}")
    if not r:
        return 0.0
    return math.log(gamma) + (gamma - 1.0) * math.log(max(p, P_FLOOR))


def log_composite_likelihood(pvals, indicator, gamma: float) -> float:
    """Data term: sum of change-point log densities over interior indices.

    ``pvals`` holds per-index p-values aligned with the series (entries at
    indices without a change-point are ignored; NaN marks "missing" and is
    rejected at change-point indices). ``indicator`` is an IndicatorVector
    or a plain 0/1 array with the fixed-endpoint convention.
    """
    bits = np.asarray(getattr(indicator, "bits", indicator))
    pvals = np.asarray(pvals, dtype=float)
    if pvals.shape != bits.shape:
        raise ValueError("pvals and indicator must have equal length")
    total = 0.0
    for i in np.nonzero(bits[1:-1])[0] + 1:
        p = pvals[i]
        if math.isnan(p):
            raise ValueError(f"missing p-value at change-point index {i}")
        total += log_density_p(p, 1, gamma)
    return total


@dataclass(frozen=True)
class BetaAlternative:
    """Calibrated pair (alpha, gamma); gamma solves gamma*alpha**(gamma-1)=1."""

    alpha: float
    gamma: float

    def __post_init__(self):
        if not 0.0 < self.alpha < ALPHA_MAX:
            raise CalibrationError(f"alpha must lie in (0, 1/e), got {self.alpha}")
        residual = abs(self.gamma * self.alpha ** (self.gamma - 1.0) - 1.0)
        if not residual < 1e-10:
            raise ValueError(
                f"gamma={self.gamma} is not calibrated to alpha={self.alpha} "
                f"(residual {residual:.3e})"
            )

    @classmethod
    def from_alpha(cls, alpha: float) -> "BetaAlternative":
        return cls(alpha=alpha, gamma=solve_gamma(alpha))

    def log_density(self, p: float, r: int) -> float:
        return log_density_p(p, r, self.gamma)
