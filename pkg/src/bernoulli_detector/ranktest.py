"""Wilcoxon rank-sum (Mann-Whitney) two-sample test.

Small tie-free samples get exact two-sided p-values from the counting
recursion over rank assignments; everything else uses the normal
approximation with midranks, tie-corrected variance and a continuity
correction. The two-sided convention follows from taking the statistic
U = min(U_Y, U_Z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Largest per-sample size handled by the exact null distribution; beyond
# this (or whenever ties are present) the normal approximation is used.
EXACT_MAX_N = 12


@dataclass(frozen=True)
class RankTestResult:
    """Outcome of the two-sample rank test.

    ``u`` is min(u_y, u_z); ``p`` is the two-sided p-value (None when only
    the statistic was requested) and ``method`` is "exact" or "normal".
    """

    u: float
    u_y: float
    u_z: float
    n_y: int
    n_z: int
    r_y: float
    r_z: float
    p: float | None = None
    method: str | None = None


def _pooled_midranks(y: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Midranks of the pooled sample (1-based) and the sizes of tie groups.

    Ties share the average of the positions they occupy. Returns the ranks
    aligned with the concatenation (y, z) and an array of tie-group sizes
    (only groups of size >= 2).
    """
    pooled = np.concatenate((y, z))
    n = pooled.size
    order = np.argsort(pooled, kind="stable")
    sorted_vals = pooled[order]
    # run boundaries of equal values
    boundaries = np.nonzero(np.diff(sorted_vals))[0]
    starts = np.concatenate(([0], boundaries + 1))
    stops = np.concatenate((boundaries + 1, [n]))
    counts = stops - starts
    midranks = (starts + stops + 1) / 2.0  # average of 1-based positions
    ranks = np.empty(n)
    ranks[order] = np.repeat(midranks, counts)
    return ranks, counts[counts > 1]


def rank_sums(y, z) -> tuple[float, float]:
    """Rank sums (R_Y, R_Z) over the pooled, midrank-tied sample."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if y.size == 0 or z.size == 0:
        raise ValueError("both samples must be non-empty")
    ranks, _ = _pooled_midranks(y, z)
    return float(ranks[: y.size].sum()), float(ranks[y.size :].sum())


def u_statistic(y, z) -> RankTestResult:
    """Mann-Whitney statistics without a p-value.

    U_Y = n_Y n_Z + n_Y(n_Y+1)/2 - R_Y and symmetrically for U_Z;
    the reported statistic is U = min(U_Y, U_Z).
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    r_y, r_z = rank_sums(y, z)
    n_y, n_z = y.size, z.size
    u_y = n_y * n_z + n_y * (n_y + 1) / 2.0 - r_y
    u_z = n_y * n_z + n_z * (n_z + 1) / 2.0 - r_z
    return RankTestResult(
        u=min(u_y, u_z), u_y=u_y, u_z=u_z, n_y=n_y, n_z=n_z, r_y=r_y, r_z=r_z
    )


@lru_cache(maxsize=None)
def _exact_null_cdf(n_y: int, n_z: int) -> np.ndarray:
    """P(U <= u) for u = 0..n_y*n_z under the tie-free null.

    Built from the counting recursion f[m, n](u) = f[m-1, n](u - n)
    + f[m, n-1](u), conditioning on which sample holds the largest
    observation; f counts rank assignments with U_Y = u.
    """
    max_u = n_y * n_z
    delta = np.zeros(max_u + 1)
    delta[0] = 1.0
    prev = [delta.copy() for _ in range(n_z + 1)]  # f[0, n] for all n
    for _m in range(1, n_y + 1):
        cur = [delta.copy()]  # f[m, 0]
        for n in range(1, n_z + 1):
            f = cur[n - 1].copy()
            f[n:] += prev[n][: max_u + 1 - n]
            cur.append(f)
        prev = cur
    counts = prev[n_z]
    return np.cumsum(counts) / counts.sum()


def exact_pvalue(u: float, n_y: int, n_z: int) -> float:
    """Two-sided exact p-value, min(1, 2 P(U_side <= u)).

    Valid for tie-free data where U takes integer values; the null
    distribution is the uniform one over all C(n_y+n_z, n_y) rank
    assignments.
    """
    cdf = _exact_null_cdf(n_y, n_z)
    iu = int(math.floor(u + 1e-9))
    iu = min(max(iu, 0), n_y * n_z)
    return min(1.0, 2.0 * float(cdf[iu]))


def normal_pvalue(u: float, n_y: int, n_z: int, tie_groups=()) -> float:
    """Two-sided p-value from the normal approximation of U.

    Uses mean n_y n_z / 2, the tie-corrected variance, and a continuity
    correction of +1/2 toward the mean (no correction once u >= mean - 1/2,
    where the p-value is 1). Degenerate pooled samples (zero variance)
    give p = 1.
    """
    if n_y < 1 or n_z < 1:
        raise ValueError("both samples must be non-empty")
    n = n_y + n_z
    mean_u = n_y * n_z / 2.0
    tie_term = sum(t**3 - t for t in tie_groups)
    var_u = n_y * n_z / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var_u <= 0.0:
        return 1.0
    z = (u + 0.5 - mean_u) / math.sqrt(var_u)
    if z >= 0.0:
        return 1.0
    # 2 * Phi(z) = erfc(-z / sqrt(2)); keep the result strictly positive
    p = math.erfc(-z / math.sqrt(2.0))
    return max(p, 5e-324)


def wilcoxon_pvalue(y, z) -> RankTestResult:
    """Two-sided rank-sum test with automatic exact/normal dispatch.

    The exact route requires both sample sizes <= EXACT_MAX_N and a
    tie-free pooled sample; otherwise the tie-corrected normal
    approximation is used.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if y.size == 0 or z.size == 0:
        raise ValueError("both samples must be non-empty")
    ranks, tie_groups = _pooled_midranks(y, z)
    n_y, n_z = y.size, z.size
    r_y = float(ranks[:n_y].sum())
    r_z = float(ranks[n_y:].sum())
    u_y = n_y * n_z + n_y * (n_y + 1) / 2.0 - r_y
    u_z = n_y * n_z + n_z * (n_z + 1) / 2.0 - r_z
    u = min(u_y, u_z)
    if tie_groups.size == 0 and n_y <= EXACT_MAX_N and n_z <= EXACT_MAX_N:
        p = exact_pvalue(u, n_y, n_z)
        method = "exact"
    else:
        p = normal_pvalue(u, n_y, n_z, tuple(int(t) for t in tie_groups))
        method = "normal"
    return RankTestResult(
        u=u, u_y=u_y, u_z=u_z, n_y=n_y, n_z=n_z, r_y=r_y, r_z=r_z, p=p, method=method
    )
