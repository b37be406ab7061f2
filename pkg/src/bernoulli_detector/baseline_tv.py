"""Fused-lasso baseline: exact 1D total-variation denoising.

Solves min_theta 1/2 sum (x_i - theta_i)^2 + lam * sum |theta_{i+1} - theta_i|
with the direct single-pass algorithm (running tube bounds with segment
flushes), which is exact up to floating-point rounding. Change-points are
read off the fitted piecewise-constant signal wherever a successive
difference exceeds a threshold; the reported index is the last point of
the left segment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TVSolution:
    fitted: np.ndarray
    lam: float


def _tv_denoise_vector(y: np.ndarray, lam: float) -> np.ndarray:
    x = np.empty_like(y)
    n = y.size
    if n == 0:
        return x
    if lam <= 0.0 or n == 1:
        return y.copy()
    k = k0 = km = kp = 0
    vmin = y[0] - lam
    vmax = y[0] + lam
    umin = lam
    umax = -lam
    while True:
        if k == n - 1:
            x[k] = vmin + umin
            return x
        if y[k + 1] + umin < vmin - lam:
            # the lower tube bound is violated: flush a segment at vmin
            x[k0 : km + 1] = vmin
            k = k0 = km = kp = km + 1
            vmin = y[k]
            vmax = y[k] + 2.0 * lam
            umin = lam
            umax = -lam
        elif y[k + 1] + umax > vmax + lam:
            # upper bound violated: flush a segment at vmax
            x[k0 : kp + 1] = vmax
            k = k0 = km = kp = kp + 1
            vmin = y[k] - 2.0 * lam
            vmax = y[k]
            umin = lam
            umax = -lam
        else:
            k += 1
            umin += y[k] - vmin
            umax += y[k] - vmax
            if umin >= lam:
                vmin += (umin - lam) / (k - k0 + 1)
                umin = lam
                km = k
            if umax <= -lam:
                vmax += (umax + lam) / (k - k0 + 1)
                umax = -lam
                kp = k
        if k < n - 1:
            continue
        # reached the right end: settle the remaining segment(s)
        if umin < 0.0:
            x[k0 : km + 1] = vmin
            k = k0 = km = km + 1
            vmin = y[k]
            umin = lam
            umax = y[k] + lam - vmax
        elif umax > 0.0:
            x[k0 : kp + 1] = vmax
            k = k0 = kp = kp + 1
            vmax = y[k]
            umax = -lam
            umin = y[k] - lam - vmin
        else:
            x[k0:] = vmin + umin / (k - k0 + 1)
            return x


def tv_denoise(x, lam: float) -> TVSolution:
    """Exact minimizer of the quadratic-plus-total-variation objective."""
    if lam < 0:
        raise ValueError("lam must be >= 0")
    x = np.asarray(x, dtype=float).ravel()
    return TVSolution(fitted=_tv_denoise_vector(x, float(lam)), lam=float(lam))


def extract_change_points(sol: TVSolution, threshold: float) -> tuple[int, ...]:
    """Indices i with |fitted[i+1] - fitted[i]| > threshold (0-based, the
    change-point is the last index of the left segment)."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    jumps = np.abs(np.diff(sol.fitted)) > threshold
    return tuple(int(i) for i in np.nonzero(jumps)[0])


def tv_objective(x, theta, lam: float) -> float:
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return float(0.5 * ((theta - x) ** 2).sum() + lam * np.abs(np.diff(theta)).sum())


def dual_running_sum(x, sol: TVSolution) -> np.ndarray:
    """Cumulative sum of (fitted - x); the optimality certificate requires
    it to stay in [-lam, lam], hit +-lam exactly at the matching jumps and
    return to 0 at the end."""
    return np.cumsum(sol.fitted - np.asarray(x, dtype=float))


def kkt_violation(x, sol: TVSolution) -> float:
    """Largest violation of the subgradient optimality conditions."""
    u = dual_running_sum(x, sol)
    lam = sol.lam
    worst = max(float(np.abs(u).max() - lam), 0.0) if u.size else 0.0
    worst = max(worst, abs(float(u[-1])) if u.size else 0.0)
    diffs = np.diff(sol.fitted)
    for i in np.nonzero(diffs)[0]:
        target = lam if diffs[i] > 0 else -lam
        worst = max(worst, abs(float(u[i]) - target))
    return worst
