"""Synthetic piecewise-constant benchmarks with controlled SNR.

The SNR between two successive segments is 10*log10(delta_mu^2 / sigma^2)
in dB, with sigma the noise standard deviation. Gaussian noise uses sigma
directly; Student-t noise with nu degrees of freedom is rescaled so its
standard deviation is also sigma (at sigma = sqrt(nu/(nu-2)) the draws
are plain unit-scale t variates).

Multivariate benchmarks propagate the change-points of a source series
into the other series with per-series probabilities, yielding both the
data matrix and the ground-truth indicators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import IndicatorMatrix, IndicatorVector, TimeSeriesMatrix


def snr_to_sigma(delta_mu: float, snr_db: float) -> float:
    """Noise standard deviation giving the requested SNR for a mean jump."""
    if delta_mu == 0:
        raise ValueError("delta_mu must be nonzero")
    return abs(delta_mu) * 10.0 ** (-snr_db / 20.0)


def sigma_to_delta_mu(sigma: float, snr_db: float) -> float:
    """Mean jump giving the requested SNR at a fixed noise level."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return sigma * 10.0 ** (snr_db / 20.0)


@dataclass(frozen=True)
class PiecewiseSpec:
    """Piecewise-constant signal description.

    ``boundaries`` are interior change-point indices (0-based, each the
    last index of its segment); ``means`` has one entry per segment;
    ``nu`` is only used by the "student" noise model and must exceed 2
    so the variance exists.
    """

    n: int
    boundaries: tuple[int, ...]
    means: tuple[float, ...]
    sigma: float
    noise: str = "gaussian"
    nu: float = 3.0

    def __post_init__(self):
        object.__setattr__(self, "boundaries", tuple(int(b) for b in self.boundaries))
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        if self.n < 4:
            raise ValueError("n must be at least 4")
        if list(self.boundaries) != sorted(set(self.boundaries)):
            raise ValueError("boundaries must be strictly increasing")
        if self.boundaries and not (
            1 <= self.boundaries[0] and self.boundaries[-1] <= self.n - 2
        ):
            raise ValueError("boundaries must be interior indices")
        if len(self.means) != len(self.boundaries) + 1:
            raise ValueError(
                f"need {len(self.boundaries) + 1} segment means, got {len(self.means)}"
            )
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.noise not in ("gaussian", "student"):
            raise ValueError(f"unknown noise model {self.noise!r}")
        if self.noise == "student" and not self.nu > 2:
            raise ValueError("student noise needs nu > 2 for a finite variance")

    @property
    def segment_slices(self) -> tuple[tuple[int, int], ...]:
        edges = (0,) + tuple(b + 1 for b in self.boundaries) + (self.n,)
        return tuple((edges[j], edges[j + 1]) for j in range(len(edges) - 1))

    def mean_vector(self) -> np.ndarray:
        mu = np.empty(self.n)
        for (start, stop), m in zip(self.segment_slices, self.means):
            mu[start:stop] = m
        return mu


def gen_piecewise(spec: PiecewiseSpec, seed) -> np.ndarray:
    """Sample one series from a PiecewiseSpec, deterministically per seed."""
    rng = np.random.default_rng(seed)
    mu = spec.mean_vector()
    if spec.noise == "gaussian":
        noise = spec.sigma * rng.standard_normal(spec.n)
    else:
        scale = spec.sigma / math.sqrt(spec.nu / (spec.nu - 2.0))
        noise = scale * rng.standard_t(spec.nu, size=spec.n)
    return mu + noise


@dataclass(frozen=True)
class DependencyStructure:
    """Propagation weights between series.

    weights[k, l] is the probability that a change-point in series k
    occurs in series l as well; the diagonal is 1. Only the first row is
    consumed by gen_dependent (series 0 is the source).
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weights must be a square matrix")
        if ((w < 0) | (w > 1)).any():
            raise ValueError("weights must lie in [0, 1]")
        if not np.allclose(np.diag(w), 1.0):
            raise ValueError("diagonal weights must be 1")
        object.__setattr__(self, "weights", w)

    @property
    def n_series(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def from_source_weights(cls, source_weights) -> "DependencyStructure":
        """Structure where series 0 drives the rest with the given weights."""
        w = np.eye(len(source_weights) + 1)
        w[0, 1:] = np.asarray(source_weights, dtype=float)
        return cls(weights=w)


def _random_walk_means(n_segments: int, delta_mu: float, rng) -> np.ndarray:
    """Segment levels with |successive difference| = delta_mu, random signs."""
    steps = delta_mu * rng.choice((-1.0, 1.0), size=max(n_segments - 1, 0))
    return np.concatenate(([0.0], np.cumsum(steps)))


def gen_dependent(
    base_boundaries,
    structure: DependencyStructure,
    delta_mu: float,
    sigma: float,
    seed,
    n: int | None = None,
) -> tuple[TimeSeriesMatrix, IndicatorMatrix]:
    """Multivariate signal where series 0's change-points propagate.

    Each boundary of series 0 is copied into series l with probability
    weights[0, l]; per-series segment levels are then drawn as a
    random-sign walk with step delta_mu, so every pair of successive
    segments realizes the SNR implied by (delta_mu, sigma). Returns the
    data and the ground-truth indicator matrix.
    """
    base_boundaries = tuple(int(b) for b in base_boundaries)
    if n is None:
        n = base_boundaries[-1] + 2 if base_boundaries else 4
    k = structure.n_series
    rng = np.random.default_rng(seed)

    rows = []
    values = np.empty((k, n))
    for j in range(k):
        if j == 0:
            boundaries = base_boundaries
        else:
            keep = rng.random(len(base_boundaries)) < structure.weights[0, j]
            boundaries = tuple(b for b, kept in zip(base_boundaries, keep) if kept)
        indicator = IndicatorVector.from_change_points(n, boundaries)
        means = _random_walk_means(len(boundaries) + 1, delta_mu, rng)
        spec = PiecewiseSpec(
            n=n, boundaries=boundaries, means=tuple(means), sigma=sigma
        )
        values[j] = spec.mean_vector() + sigma * rng.standard_normal(n)
        rows.append(indicator)

    return (
        TimeSeriesMatrix(values=values),
        IndicatorMatrix(rows=tuple(rows)),
    )


# Benchmark presets (0-based boundary indices).


def single_step_spec(
    snr_db: float, n: int = 100, step_at: int = 49, noise: str = "gaussian",
    nu: float = 3.0,
) -> PiecewiseSpec:
    """One mean step; the boundary sits at 0-based index 49 for n=100
    (time position 50), so both halves have 50 points.

    Gaussian noise fixes the jump at 1 and derives sigma from the SNR;
    Student noise fixes sigma at sqrt(nu/(nu-2)) (unit-scale t draws) and
    derives the jump instead.
    """
    if noise == "student":
        sigma = math.sqrt(nu / (nu - 2.0))
        jump = sigma_to_delta_mu(sigma, snr_db)
    else:
        sigma = snr_to_sigma(1.0, snr_db)
        jump = 1.0
    return PiecewiseSpec(
        n=n, boundaries=(step_at,), means=(0.0, jump), sigma=sigma, noise=noise, nu=nu
    )


def multi_step_spec(
    snr_db: float = 5.0, n_segments: int = 16, segment_len: int = 20
) -> PiecewiseSpec:
    """Alternating-mean staircase: 16 segments of 20 points by default,
    successive means differing by +-1.0."""
    n = n_segments * segment_len
    boundaries = tuple(segment_len * j - 1 for j in range(1, n_segments))
    means = tuple(float(j % 2) for j in range(n_segments))
    return PiecewiseSpec(
        n=n, boundaries=boundaries, means=means, sigma=snr_to_sigma(1.0, snr_db)
    )


def dependent_preset(
    snr_db: float = 0.0,
    seed=0,
    n: int = 1000,
    n_segments: int = 20,
    source_weights=(0.9, 0.6, 0.2),
) -> tuple[TimeSeriesMatrix, IndicatorMatrix]:
    """Four dependent series: 20 equal segments in the source series whose
    boundaries propagate with probabilities (0.9, 0.6, 0.2)."""
    segment_len = n // n_segments
    boundaries = tuple(segment_len * j - 1 for j in range(1, n_segments))
    structure = DependencyStructure.from_source_weights(source_weights)
    sigma = 1.0
    delta_mu = sigma_to_delta_mu(sigma, snr_db)
    return gen_dependent(boundaries, structure, delta_mu, sigma, seed, n=n)
