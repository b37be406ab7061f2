"""Univariate detector: marginalized indicator posterior and its samplers.

The posterior over an indicator vector R with k interior change-points is

    ln f(R | X) = ln Gamma(k + 1/2) + ln Gamma(N - k - 3/2)
                  + sum over change-points i of [ln(gamma) + (gamma-1) ln p_i(R)]

up to an additive constant, where p_i(R) is the rank-test p-value of the
two segments meeting at i under the segmentation induced by R. Two MCMC
schemes target it: a blocked Gibbs sampler whose site/triple conditionals
are exact, and a cheaper single-site sampler whose conditionals skip the
neighbor p-value updates (and therefore need not be mutually compatible).
The best-scoring sampled state is the MAP estimate.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .calibration import ALPHA_MAX, P_FLOOR, solve_gamma
from .core import IndicatorVector, SegmentPvalues

_BLOCK_ASSIGNMENTS = {
    1: tuple(itertools.product((0, 1))),
    2: tuple(itertools.product((0, 1), repeat=2)),
    3: tuple(itertools.product((0, 1), repeat=3)),
}


@dataclass(frozen=True)
class UniSamplerConfig:
    """Settings for one chain; ``variant`` picks the sampler."""

    alpha: float = 0.01
    iterations: int = 1000
    seed: int | None = 0
    variant: str = "pseudo"
    initial_state: IndicatorVector | None = None
    burn_in: int = 0  # applies to the marginal-frequency report only

    def __post_init__(self):
        if not 0.0 < self.alpha < ALPHA_MAX:
            raise ValueError(f"alpha must lie in (0, 1/e), got {self.alpha}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.variant not in ("pseudo", "blocked"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn_in must lie in [0, iterations)")


class MapEstimate(NamedTuple):
    indicator: IndicatorVector
    log_score: float


@dataclass(frozen=True)
class SamplerTrace:
    """Recorded chain output: one entry per sweep.

    ``samples`` holds the interior change-point tuples, ``best`` the
    highest-scoring sampled state, ``marginal`` the per-index frequency of
    r_i = 1 over post-burn-in sweeps (endpoints are always 1).
    """

    samples: tuple[tuple[int, ...], ...]
    log_scores: np.ndarray
    best: MapEstimate
    marginal: np.ndarray
    burn_in: int = 0


def log_posterior_uni(r, x, gamma: float, pvalues: SegmentPvalues | None = None) -> float:
    """Log pseudo-posterior of an indicator vector, up to a constant.

    Every change-point's p-value is recomputed under the segmentation
    induced by ``r``. Pass a SegmentPvalues cache for ``x`` to amortize
    repeated evaluations.
    """
    bits = np.asarray(getattr(r, "bits", r))
    x = np.asarray(x, dtype=float)
    n = bits.size
    if pvalues is None:
        pvalues = SegmentPvalues(x)
    chain = np.nonzero(bits)[0]
    k = chain.size - 2
    score = float(gammaln(k + 0.5) + gammaln(n - k - 1.5))
    log_gamma = math.log(gamma)
    gm1 = gamma - 1.0
    for t in range(1, chain.size - 1):
        score += log_gamma + gm1 * pvalues.log_pvalue(
            int(chain[t - 1]), int(chain[t]), int(chain[t + 1])
        )
    return score


def conditional_prob_pseudo(p_i: float, k_without_i: int, n: int, gamma: float) -> float:
    """Change probability at one site when neighbor p-values are held fixed.

        (k + 1/2) gamma p^(gamma-1)
        ---------------------------------------------
        (k + 1/2) gamma p^(gamma-1) + n - k - 5/2

    with k the interior change-point count excluding site i. Computed in
    the log domain; p^(gamma-1) overflows double precision otherwise.
    """
    if not 0 <= k_without_i <= n - 3:
        raise ValueError(f"k_without_i={k_without_i} out of range for n={n}")
    d = (
        math.log(k_without_i + 0.5)
        + math.log(gamma)
        + (gamma - 1.0) * math.log(max(p_i, P_FLOOR))
        - math.log(n - k_without_i - 2.5)
    )
    if d > 36.0:
        return 1.0
    if d < -36.0:
        return math.exp(d)
    e = math.exp(d)
    return e / (1.0 + e)


def map_single_cp(p_i: float, q: float, gamma: float) -> int:
    """MAP change decision at one site when all other sites are quiet:
    1 iff gamma p^(gamma-1) > (1-q)/q."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    lhs = math.log(gamma) + (gamma - 1.0) * math.log(max(p_i, P_FLOOR))
    return 1 if lhs > math.log(1.0 - q) - math.log(q) else 0


def mmse_single_cp(p_i: float, q: float, gamma: float) -> float:
    """Posterior change probability at one site when all other sites are
    quiet: gamma p^(gamma-1) q / (1 - q + gamma p^(gamma-1) q)."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    d = (
        math.log(gamma)
        + (gamma - 1.0) * math.log(max(p_i, P_FLOOR))
        + math.log(q)
        - math.log1p(-q)
    )
    if d > 36.0:
        return 1.0
    if d < -36.0:
        return math.exp(d)
    e = math.exp(d)
    return e / (1.0 + e)


def _initial_change_points(cfg: UniSamplerConfig, n: int) -> list[int]:
    """Sorted change-point indices (endpoints included) for the first state."""
    if cfg.initial_state is None:
        return [0, n - 1]
    if cfg.initial_state.n != n:
        raise ValueError("initial_state length does not match the series")
    return [0] + list(cfg.initial_state.change_points) + [n - 1]


def _prior_table(n: int) -> np.ndarray:
    k = np.arange(n - 1)
    return gammaln(k + 0.5) + gammaln(n - k - 1.5)


def _score_state(cps, prior_table, log_pvalue, log_gamma, gm1) -> float:
    score = prior_table[len(cps) - 2]
    for t in range(1, len(cps) - 1):
        score += log_gamma + gm1 * log_pvalue(cps[t - 1], cps[t], cps[t + 1])
    return score


def _finish_trace(n, samples, log_scores, best_state, best_score, marginal_counts,
                  kept, burn_in) -> SamplerTrace:
    marginal = marginal_counts / kept
    marginal[0] = marginal[-1] = 1.0
    best = MapEstimate(
        indicator=IndicatorVector.from_change_points(n, best_state),
        log_score=best_score,
    )
    return SamplerTrace(
        samples=tuple(samples),
        log_scores=log_scores,
        best=best,
        marginal=marginal,
        burn_in=burn_in,
    )


def run_pseudo(x, cfg: UniSamplerConfig) -> SamplerTrace:
    """Single-site sampler; one sweep visits every interior index once in
    fresh random order, drawing each indicator from the fixed-neighbor
    conditional. Recorded states are rescored under the full posterior."""
    if cfg.variant != "pseudo":
        raise ValueError(f"config variant is {cfg.variant!r}, expected 'pseudo'")
    x = np.ascontiguousarray(np.asarray(x, dtype=float).ravel())
    n = x.size
    gamma = solve_gamma(cfg.alpha)
    log_gamma = math.log(gamma)
    gm1 = gamma - 1.0
    rng = np.random.default_rng(cfg.seed)
    pvalues = SegmentPvalues(x)
    log_pvalue = pvalues.log_pvalue

    cps = _initial_change_points(cfg, n)
    k = len(cps) - 2
    prior_table = _prior_table(n)
    interior = np.arange(1, n - 1)

    samples = []
    log_scores = np.empty(cfg.iterations)
    marginal_counts = np.zeros(n)
    best_score = -math.inf
    best_state: tuple[int, ...] = ()

    for m in range(cfg.iterations):
        order = rng.permutation(interior)
        us = rng.random(n - 2)
        for t in range(n - 2):
            i = int(order[t])
            pos = bisect_left(cps, i)
            cur = 1 if cps[pos] == i else 0
            left = cps[pos - 1]
            right = cps[pos + 1] if cur else cps[pos]
            k_wo = k - cur
            d = (
                math.log(k_wo + 0.5)
                + log_gamma
                + gm1 * log_pvalue(left, i, right)
                - math.log(n - k_wo - 2.5)
            )
            if d > 36.0:
                prob = 1.0
            elif d < -36.0:
                prob = 0.0
            else:
                e = math.exp(d)
                prob = e / (1.0 + e)
            new = 1 if us[t] < prob else 0
            if new != cur:
                if new:
                    cps.insert(pos, i)
                    k += 1
                else:
                    cps.pop(pos)
                    k -= 1
        state = tuple(cps[1:-1])
        samples.append(state)
        score = _score_state(cps, prior_table, log_pvalue, log_gamma, gm1)
        log_scores[m] = score
        if score > best_score:
            best_score = score
            best_state = state
        if m >= cfg.burn_in:
            for c in state:
                marginal_counts[c] += 1
    return _finish_trace(
        n, samples, log_scores, best_state, best_score, marginal_counts,
        cfg.iterations - cfg.burn_in, cfg.burn_in,
    )


def run_blocked(x, cfg: UniSamplerConfig) -> SamplerTrace:
    """Blocked sampler. A visited site currently holding a change-point
    resamples the triple (r_{i-1}, r_i, r_{i+1}) jointly from its exact
    conditional; other sites get the exact single-site conditional. In
    both cases the changing factors are the prior terms plus the data
    terms at the candidate indices and at the nearest outside
    change-points on each side, whose p-values move with the candidate."""
    if cfg.variant != "blocked":
        raise ValueError(f"config variant is {cfg.variant!r}, expected 'blocked'")
    x = np.ascontiguousarray(np.asarray(x, dtype=float).ravel())
    n = x.size
    gamma = solve_gamma(cfg.alpha)
    log_gamma = math.log(gamma)
    gm1 = gamma - 1.0
    rng = np.random.default_rng(cfg.seed)
    pvalues = SegmentPvalues(x)
    log_pvalue = pvalues.log_pvalue

    cps = _initial_change_points(cfg, n)
    k = len(cps) - 2
    prior_table = _prior_table(n)
    interior = np.arange(1, n - 1)

    samples = []
    log_scores = np.empty(cfg.iterations)
    marginal_counts = np.zeros(n)
    best_score = -math.inf
    best_state: tuple[int, ...] = ()
    done = np.zeros(n, dtype=bool)

    for m in range(cfg.iterations):
        order = rng.permutation(interior)
        us = rng.random(n - 2)
        done[:] = False
        t = 0
        for i_raw in order:
            i = int(i_raw)
            if done[i]:
                continue
            u = us[t]
            t += 1
            pos = bisect_left(cps, i)
            if cps[pos] != i:
                # exact single-site conditional
                left = cps[pos - 1]
                right = cps[pos]
                s0 = prior_table[k]
                s1 = (
                    prior_table[k + 1]
                    + log_gamma
                    + gm1 * log_pvalue(left, i, right)
                )
                if left > 0:
                    ll = cps[pos - 2]
                    s0 += log_gamma + gm1 * log_pvalue(ll, left, right)
                    s1 += log_gamma + gm1 * log_pvalue(ll, left, i)
                if right < n - 1:
                    rr = cps[pos + 1]
                    s0 += log_gamma + gm1 * log_pvalue(left, right, rr)
                    s1 += log_gamma + gm1 * log_pvalue(i, right, rr)
                hi = s0 if s0 > s1 else s1
                w0 = math.exp(s0 - hi)
                w1 = math.exp(s1 - hi)
                if u * (w0 + w1) < w1:
                    cps.insert(pos, i)
                    k += 1
                done[i] = True
            else:
                block = [j for j in (i - 1, i, i + 1) if 1 <= j <= n - 2]
                pos0 = bisect_left(cps, block[0])
                i_left = cps[pos0 - 1]
                pos1 = bisect_left(cps, block[-1] + 1)
                i_right = cps[pos1]
                k_out = k - (pos1 - pos0)  # current interior ones inside block
                ll = cps[pos0 - 2] if i_left > 0 else -1
                rr = cps[pos1 + 1] if i_right < n - 1 else -1
                assignments = _BLOCK_ASSIGNMENTS[len(block)]
                scores = []
                for assign in assignments:
                    chain = [i_left]
                    for j, bit in zip(block, assign):
                        if bit:
                            chain.append(j)
                    chain.append(i_right)
                    s = prior_table[k_out + len(chain) - 2]
                    for p_idx in range(1, len(chain) - 1):
                        s += log_gamma + gm1 * log_pvalue(
                            chain[p_idx - 1], chain[p_idx], chain[p_idx + 1]
                        )
                    if i_left > 0:
                        s += log_gamma + gm1 * log_pvalue(ll, i_left, chain[1])
                    if i_right < n - 1:
                        s += log_gamma + gm1 * log_pvalue(chain[-2], i_right, rr)
                    scores.append(s)
                hi = max(scores)
                total = 0.0
                weights = []
                for s in scores:
                    w = math.exp(s - hi)
                    total += w
                    weights.append(w)
                target = u * total
                acc = 0.0
                choice = len(weights) - 1
                for c, w in enumerate(weights):
                    acc += w
                    if target < acc:
                        choice = c
                        break
                new_assign = assignments[choice]
                for j, bit in zip(block, new_assign):
                    jpos = bisect_left(cps, j)
                    have = cps[jpos] == j
                    if bit and not have:
                        cps.insert(jpos, j)
                        k += 1
                    elif not bit and have:
                        cps.pop(jpos)
                        k -= 1
                    done[j] = True
        state = tuple(cps[1:-1])
        samples.append(state)
        score = _score_state(cps, prior_table, log_pvalue, log_gamma, gm1)
        log_scores[m] = score
        if score > best_score:
            best_score = score
            best_state = state
        if m >= cfg.burn_in:
            for c in state:
                marginal_counts[c] += 1
    return _finish_trace(
        n, samples, log_scores, best_state, best_score, marginal_counts,
        cfg.iterations - cfg.burn_in, cfg.burn_in,
    )


def run(x, cfg: UniSamplerConfig) -> SamplerTrace:
    """Dispatch on cfg.variant."""
    if cfg.variant == "pseudo":
        return run_pseudo(x, cfg)
    return run_blocked(x, cfg)
