"""Joint detector for K series: column-configuration sampling.

Each interior time index carries a column configuration in an admissible
set E of K-bit patterns saying which series change there together. With a
Dirichlet prior (pseudo-counts d) on the configuration probabilities P,
marginalizing P gives

    ln f(R | X) = sum_j sum_{i: r_ji = 1} [ln(gamma) + (gamma-1) ln p_ji(R)]
                  + sum_{e in E} ln Gamma(S_e(R) + d_e)

up to a constant, where S_e counts interior columns equal to e. Columns
are resampled one index at a time from their conditional over E; the
production update recomputes only the K p-values at the visited index
(the fixed-neighbor shortcut), while the exact variant rescores every
changing factor and is used to validate against enumeration.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .calibration import ALPHA_MAX, solve_gamma
from .core import (
    AdmissibilityError,
    IndicatorMatrix,
    IndicatorVector,
    SegmentPvalues,
    TimeSeriesMatrix,
    config_counts,
)

FULL_SET_MAX_SERIES = 12


@dataclass(frozen=True)
class ConfigurationSet:
    """Admissible column patterns with their Dirichlet pseudo-counts.

    The all-zeros pattern must be a member (otherwise every time index
    would be forced to change in some series). Pseudo-counts default to 1
    for every member.
    """

    members: tuple[tuple[int, ...], ...]
    pseudo_counts: np.ndarray | None = None

    def __post_init__(self):
        members = tuple(tuple(int(b) for b in m) for m in self.members)
        if not members:
            raise ValueError("configuration set cannot be empty")
        k = len(members[0])
        if any(len(m) != k for m in members):
            raise ValueError("all configurations must have equal length")
        if any(b not in (0, 1) for m in members for b in m):
            raise ValueError("configurations must be binary")
        if len(set(members)) != len(members):
            raise ValueError("configurations must be distinct")
        if (0,) * k not in members:
            raise ValueError("the all-zeros configuration must be admissible")
        counts = self.pseudo_counts
        if counts is None:
            counts = np.ones(len(members))
        counts = np.asarray(counts, dtype=float)
        if counts.shape != (len(members),) or (counts <= 0).any():
            raise ValueError("pseudo_counts must be positive, one per member")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "pseudo_counts", counts)

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def n_series(self) -> int:
        return len(self.members[0])

    @property
    def lookup(self) -> dict[tuple[int, ...], int]:
        return {m: idx for idx, m in enumerate(self.members)}

    @property
    def zero_index(self) -> int:
        return self.members.index((0,) * self.n_series)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple("".join(str(b) for b in m) for m in self.members)

    @classmethod
    def full(cls, n_series: int, pseudo_count: float = 1.0) -> "ConfigurationSet":
        """All 2**K patterns; capped so the set stays enumerable."""
        if n_series > FULL_SET_MAX_SERIES:
            raise ValueError(
                f"full configuration set is capped at K={FULL_SET_MAX_SERIES} "
                f"series (got {n_series}); supply an explicit member list"
            )
        members = []
        for code in range(2**n_series):
            members.append(
                tuple((code >> (n_series - 1 - j)) & 1 for j in range(n_series))
            )
        counts = np.full(len(members), float(pseudo_count))
        return cls(members=tuple(members), pseudo_counts=counts)

    @classmethod
    def from_strings(cls, lines) -> "ConfigurationSet":
        """Parse one binary string per entry, e.g. '1010'."""
        members = []
        for line in lines:
            text = line.strip()
            if not text:
                continue
            if set(text) - {"0", "1"}:
                raise ValueError(f"invalid configuration string {text!r}")
            members.append(tuple(int(c) for c in text))
        return cls(members=tuple(members))


@dataclass(frozen=True)
class ConfigProbabilities:
    """One probability vector over the configuration set."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if (p < 0).any() or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "probabilities", p)


@dataclass(frozen=True)
class MultiSamplerConfig:
    alpha: float = 0.01
    iterations: int = 2000
    seed: int | None = 0
    sample_probs: bool = False
    exact_conditionals: bool = False
    initial_state: IndicatorMatrix | None = None
    burn_in: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < ALPHA_MAX:
            raise ValueError(f"alpha must lie in (0, 1/e), got {self.alpha}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn_in must lie in [0, iterations)")


class MapEstimateMulti(NamedTuple):
    indicators: IndicatorMatrix
    log_score: float


@dataclass(frozen=True)
class MultiSamplerTrace:
    """Per-sweep record: each sample is a tuple of per-series
    change-point tuples. ``p_draws`` holds one configuration-probability
    draw per sweep when enabled, aligned with the configuration set."""

    samples: tuple[tuple[tuple[int, ...], ...], ...]
    log_scores: np.ndarray
    best: MapEstimateMulti
    marginal: np.ndarray
    p_draws: np.ndarray | None = None
    burn_in: int = 0


def _as_matrix(xmat) -> np.ndarray:
    if isinstance(xmat, TimeSeriesMatrix):
        return xmat.values
    return np.atleast_2d(np.asarray(xmat, dtype=float))


def _row_caches(values: np.ndarray) -> list[SegmentPvalues]:
    return [SegmentPvalues(row) for row in values]


def _row_data_term(cps, log_pvalue, log_gamma, gm1) -> float:
    total = 0.0
    for t in range(1, len(cps) - 1):
        total += log_gamma + gm1 * log_pvalue(cps[t - 1], cps[t], cps[t + 1])
    return total


def log_posterior_multi(rmat, xmat, gamma: float, configs: ConfigurationSet,
                        pvalues: list[SegmentPvalues] | None = None) -> float:
    """Log pseudo-posterior of an indicator matrix, up to a constant."""
    rmat = rmat if isinstance(rmat, IndicatorMatrix) else IndicatorMatrix.from_bits(rmat)
    values = _as_matrix(xmat)
    if pvalues is None:
        pvalues = _row_caches(values)
    log_gamma = math.log(gamma)
    gm1 = gamma - 1.0
    score = 0.0
    for j, row in enumerate(rmat.rows):
        cps = [0] + list(row.change_points) + [row.n - 1]
        score += _row_data_term(cps, pvalues[j].log_pvalue, log_gamma, gm1)
    counts = config_counts(rmat, configs)
    score += float(gammaln(counts + configs.pseudo_counts).sum())
    return score


def _neighbors(cps, i: int) -> tuple[int, int]:
    pos = bisect_left(cps, i)
    if cps[pos] == i:
        return cps[pos - 1], cps[pos + 1]
    return cps[pos - 1], cps[pos]


def column_conditional(i: int, rmat, xmat, gamma: float,
                       configs: ConfigurationSet,
                       pvalues: list[SegmentPvalues] | None = None) -> np.ndarray:
    """Fixed-neighbor conditional distribution of column i over the set.

    Per configuration e: sum of the change-density terms of the rows with
    e_j = 1 (p-values taken with neighbors excluding i) plus
    ln(S_e^(without i) + d_e), normalized over E.
    """
    rmat = rmat if isinstance(rmat, IndicatorMatrix) else IndicatorMatrix.from_bits(rmat)
    values = _as_matrix(xmat)
    n = rmat.n_points
    if not 1 <= i <= n - 2:
        raise ValueError(f"index {i} is not interior for n={n}")
    if pvalues is None:
        pvalues = _row_caches(values)
    log_gamma = math.log(gamma)
    gm1 = gamma - 1.0

    densities = []
    for j, row in enumerate(rmat.rows):
        cps = [0] + list(row.change_points) + [row.n - 1]
        if row.bits[i]:
            cps.remove(i)
        left, right = _neighbors(cps, i)
        densities.append(log_gamma + gm1 * pvalues[j].log_pvalue(left, i, right))

    counts = config_counts(rmat, configs).astype(float)
    counts[configs.lookup[rmat.column(i)]] -= 1.0

    scores = np.empty(configs.size)
    for c, member in enumerate(configs.members):
        s = math.log(counts[c] + configs.pseudo_counts[c])
        for j, bit in enumerate(member):
            if bit:
                s += densities[j]
        scores[c] = s
    scores -= scores.max()
    weights = np.exp(scores)
    return weights / weights.sum()


def sample_P(counts, configs: ConfigurationSet, rng) -> ConfigProbabilities:
    """One Dirichlet(S + d) draw via normalized standard-gamma variates."""
    params = np.asarray(counts, dtype=float) + configs.pseudo_counts
    draws = rng.standard_gamma(params)
    return ConfigProbabilities(probabilities=draws / draws.sum())


@dataclass(frozen=True)
class ConfigSummary:
    """Quartiles of the conditional configuration probabilities
    (renormalized over the non-empty patterns)."""

    labels: tuple[str, ...]
    median: np.ndarray
    lower_quartile: np.ndarray
    upper_quartile: np.ndarray

    def ranked_labels(self) -> tuple[str, ...]:
        order = np.argsort(-self.median, kind="stable")
        return tuple(self.labels[idx] for idx in order)


def summarize_P(trace: MultiSamplerTrace, configs: ConfigurationSet) -> ConfigSummary:
    """Condition each P draw on "at least one change-point" (drop the
    all-zeros coordinate and renormalize), then report per-pattern
    quartiles."""
    if trace.p_draws is None or len(trace.p_draws) == 0:
        raise ValueError("trace has no configuration-probability draws")
    zero = configs.zero_index
    keep = [c for c in range(configs.size) if c != zero]
    draws = trace.p_draws[:, keep]
    draws = draws / draws.sum(axis=1, keepdims=True)
    q25, q50, q75 = np.percentile(draws, [25.0, 50.0, 75.0], axis=0)
    labels = tuple(configs.labels[c] for c in keep)
    return ConfigSummary(
        labels=labels, median=q50, lower_quartile=q25, upper_quartile=q75
    )


def run_multi(xmat, cfg: MultiSamplerConfig, configs: ConfigurationSet) -> MultiSamplerTrace:
    """Column-wise Gibbs over the admissible configurations.

    Every sweep visits the interior indices in fresh random order; at each
    index the K per-row p-values are computed and the column is redrawn
    from its conditional, with the configuration counts maintained
    incrementally. Recorded states are rescored under the full posterior.
    """
    values = _as_matrix(xmat)
    n_series, n = values.shape
    if configs.n_series != n_series:
        raise ValueError(
            f"configuration set is for K={configs.n_series} series, data has {n_series}"
        )
    gamma = solve_gamma(cfg.alpha)
    log_gamma = math.log(gamma)
    gm1 = gamma - 1.0
    rng = np.random.default_rng(cfg.seed)
    pvalues = _row_caches(values)
    log_pv = [pv.log_pvalue for pv in pvalues]
    lookup = configs.lookup
    members = configs.members
    ones_of = [tuple(j for j, b in enumerate(m) if b) for m in members]
    d = configs.pseudo_counts
    L = configs.size

    # chain state
    if cfg.initial_state is None:
        cps = [[0, n - 1] for _ in range(n_series)]
        col_idx = np.full(n, lookup[(0,) * n_series], dtype=np.int64)
    else:
        if cfg.initial_state.n_points != n or cfg.initial_state.n_series != n_series:
            raise ValueError("initial_state shape does not match the data")
        cps = [
            [0] + list(row.change_points) + [n - 1]
            for row in cfg.initial_state.rows
        ]
        col_idx = np.empty(n, dtype=np.int64)
        for i in range(1, n - 1):
            key = cfg.initial_state.column(i)
            if key not in lookup:
                raise AdmissibilityError(
                    f"initial column {i} has configuration {key} outside the set"
                )
            col_idx[i] = lookup[key]
    counts = np.zeros(L)
    for i in range(1, n - 1):
        counts[col_idx[i]] += 1

    interior = np.arange(1, n - 1)
    samples = []
    log_scores = np.empty(cfg.iterations)
    marginal_counts = np.zeros((n_series, n))
    p_draws = np.empty((cfg.iterations, L)) if cfg.sample_probs else None
    best_score = -math.inf
    best_state = None

    densities = [0.0] * n_series

    for m in range(cfg.iterations):
        order = rng.permutation(interior)
        us = rng.random(n - 2)
        for t in range(n - 2):
            i = int(order[t])
            cur = int(col_idx[i])
            if cfg.exact_conditionals:
                term0 = [0.0] * n_series
                term1 = [0.0] * n_series
                for j in range(n_series):
                    base = cps[j]
                    without = [c for c in base if c != i]
                    term0[j] = _row_data_term(without, log_pv[j], log_gamma, gm1)
                    pos = bisect_left(without, i)
                    with_i = without[:pos] + [i] + without[pos:]
                    term1[j] = _row_data_term(with_i, log_pv[j], log_gamma, gm1)
                scores = []
                for c in range(L):
                    s = math.log(counts[c] - (c == cur) + d[c])
                    member = members[c]
                    for j in range(n_series):
                        s += term1[j] if member[j] else term0[j]
                    scores.append(s)
            else:
                for j in range(n_series):
                    row_cps = cps[j]
                    pos = bisect_left(row_cps, i)
                    if row_cps[pos] == i:
                        left, right = row_cps[pos - 1], row_cps[pos + 1]
                    else:
                        left, right = row_cps[pos - 1], row_cps[pos]
                    densities[j] = log_gamma + gm1 * log_pv[j](left, i, right)
                scores = []
                for c in range(L):
                    s = math.log(counts[c] - (c == cur) + d[c])
                    for j in ones_of[c]:
                        s += densities[j]
                    scores.append(s)
            hi = max(scores)
            total = 0.0
            weights = []
            for s in scores:
                w = math.exp(s - hi)
                total += w
                weights.append(w)
            target = us[t] * total
            acc = 0.0
            new = L - 1
            for c in range(L):
                acc += weights[c]
                if target < acc:
                    new = c
                    break
            if new != cur:
                old_member = members[cur]
                new_member = members[new]
                for j in range(n_series):
                    if old_member[j] != new_member[j]:
                        row_cps = cps[j]
                        pos = bisect_left(row_cps, i)
                        if new_member[j]:
                            row_cps.insert(pos, i)
                        else:
                            row_cps.pop(pos)
                counts[cur] -= 1
                counts[new] += 1
                col_idx[i] = new
        # record the sweep
        state = tuple(tuple(row[1:-1]) for row in cps)
        samples.append(state)
        score = float(gammaln(counts + d).sum())
        for j in range(n_series):
            score += _row_data_term(cps[j], log_pv[j], log_gamma, gm1)
        log_scores[m] = score
        if score > best_score:
            best_score = score
            best_state = state
        if m >= cfg.burn_in:
            for j in range(n_series):
                for c in state[j]:
                    marginal_counts[j, c] += 1
        if cfg.sample_probs:
            draws = rng.standard_gamma(counts + d)
            p_draws[m] = draws / draws.sum()

    kept = cfg.iterations - cfg.burn_in
    marginal = marginal_counts / kept
    marginal[:, 0] = marginal[:, -1] = 1.0
    best = MapEstimateMulti(
        indicators=IndicatorMatrix(
            rows=tuple(
                IndicatorVector.from_change_points(n, row_state)
                for row_state in best_state
            )
        ),
        log_score=best_score,
    )
    return MultiSamplerTrace(
        samples=tuple(samples),
        log_scores=log_scores,
        best=best,
        marginal=marginal,
        p_draws=p_draws,
        burn_in=cfg.burn_in,
    )
