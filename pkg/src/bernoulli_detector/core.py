"""Shared data model: observations, change-point indicators, segmentation.

Index convention: arrays are 0-based, so a series of length N occupies
indices 0..N-1 and carries fixed change-points at both ends
(bits[0] = bits[N-1] = 1). A change-point is the last index of its
segment. Human-facing reports (the CLI) translate to 1-based positions;
everything in the library itself is 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ranktest
from .calibration import P_FLOOR


class AdmissibilityError(ValueError):
    """An indicator column fell outside the admissible configuration set."""


@dataclass(frozen=True, eq=False)
class TimeSeriesMatrix:
    """K aligned series of N time points, one row per series."""

    values: np.ndarray
    series_names: tuple[str, ...] = ()

    def __eq__(self, other):
        if not isinstance(other, TimeSeriesMatrix):
            return NotImplemented
        return self.series_names == other.series_names and np.array_equal(
            self.values, other.values
        )

    def __hash__(self):
        return hash((self.series_names, self.values.tobytes()))

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise ValueError("values must be a K x N matrix")
        if values.shape[1] < 4:
            raise ValueError(f"need at least 4 time points, got {values.shape[1]}")
        if not np.isfinite(values).all():
            raise ValueError("values must be finite (no NaN/inf)")
        names = self.series_names or tuple(
            f"series_{j + 1}" for j in range(values.shape[0])
        )
        if len(names) != values.shape[0]:
            raise ValueError("series_names length must match the number of rows")
        object.__setattr__(self, "series_names", tuple(str(n) for n in names))

    @property
    def n_series(self) -> int:
        return self.values.shape[0]

    @property
    def n_points(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_series(cls, x, name: str = "series_1") -> "TimeSeriesMatrix":
        return cls(values=np.asarray(x, dtype=float)[None, :], series_names=(name,))


@dataclass(frozen=True, eq=False)
class IndicatorVector:
    """Binary change-point marks for one series; endpoints are always 1."""

    bits: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, IndicatorVector):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 1 or bits.size < 4:
            raise ValueError("bits must be a vector of length >= 4")
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("bits must be 0/1")
        if bits[0] != 1 or bits[-1] != 1:
            raise ValueError("boundary convention violated: bits[0] and bits[-1] must be 1")
        object.__setattr__(self, "bits", bits.astype(np.int8))

    @property
    def n(self) -> int:
        return self.bits.size

    @property
    def interior_count(self) -> int:
        return int(self.bits[1:-1].sum())

    @property
    def change_points(self) -> tuple[int, ...]:
        """Interior change-point indices, sorted."""
        return tuple(int(i) for i in np.nonzero(self.bits[1:-1])[0] + 1)

    @classmethod
    def from_change_points(cls, n: int, change_points=()) -> "IndicatorVector":
        bits = np.zeros(n, dtype=np.int8)
        bits[0] = bits[-1] = 1
        for i in change_points:
            if not 1 <= i <= n - 2:
                raise ValueError(f"change-point index {i} is not interior for n={n}")
            bits[i] = 1
        return cls(bits=bits)


@dataclass(frozen=True)
class IndicatorMatrix:
    """One IndicatorVector per series; column i is the configuration at i."""

    rows: tuple[IndicatorVector, ...]

    def __post_init__(self):
        rows = tuple(self.rows)
        if not rows:
            raise ValueError("need at least one row")
        n = rows[0].n
        if any(r.n != n for r in rows):
            raise ValueError("all rows must have equal length")
        object.__setattr__(self, "rows", rows)

    @property
    def n_series(self) -> int:
        return len(self.rows)

    @property
    def n_points(self) -> int:
        return self.rows[0].n

    @property
    def bits(self) -> np.ndarray:
        return np.stack([r.bits for r in self.rows])

    def column(self, i: int) -> tuple[int, ...]:
        return tuple(int(r.bits[i]) for r in self.rows)

    @classmethod
    def from_bits(cls, bits) -> "IndicatorMatrix":
        bits = np.atleast_2d(np.asarray(bits))
        return cls(rows=tuple(IndicatorVector(bits=row) for row in bits))


@dataclass(frozen=True)
class Segmentation:
    """Segment layout induced by an IndicatorVector.

    ``boundaries`` are the indices where bits = 1 (including both ends);
    ``segments`` are half-open (start, stop) ranges partitioning 0..N-1,
    each ending at a boundary (its last index, stop - 1, is the
    change-point). Index 0 forms its own unit segment by the endpoint
    convention.
    """

    boundaries: tuple[int, ...]
    segments: tuple[tuple[int, int], ...]

    @classmethod
    def from_indicator(cls, r: IndicatorVector) -> "Segmentation":
        boundaries = tuple(int(i) for i in np.nonzero(r.bits)[0])
        segments = [(0, 1)]
        prev = 0
        for b in boundaries[1:]:
            segments.append((prev + 1, b + 1))
            prev = b
        return cls(boundaries=boundaries, segments=tuple(segments))


def locate_neighbors(r, i: int) -> tuple[int, int]:
    """Nearest change-point indices strictly before and after interior i.

    Both exist because of the fixed endpoints; the value of bits[i]
    itself is irrelevant (i is skipped).
    """
    bits = np.asarray(getattr(r, "bits", r))
    n = bits.size
    if not 1 <= i <= n - 2:
        raise ValueError(f"index {i} is not interior for n={n}")
    left = i - 1
    while bits[left] == 0:
        left -= 1
    right = i + 1
    while bits[right] == 0:
        right += 1
    return int(left), int(right)


def segments_around(x, r, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Samples of the segments meeting at interior index i.

    The left segment is x[i_minus+1 .. i], the right one x[i+1 .. i_plus]
    (inclusive); both are non-empty.
    """
    x = np.asarray(x, dtype=float)
    i_minus, i_plus = locate_neighbors(r, i)
    return x[i_minus + 1 : i + 1], x[i + 1 : i_plus + 1]


def count_change_points(r) -> int:
    """Number of interior change-points (endpoints excluded)."""
    bits = np.asarray(getattr(r, "bits", r))
    return int(bits[1:-1].sum())


def config_counts(rmat: IndicatorMatrix, configs) -> np.ndarray:
    """Occurrences of each admissible configuration among interior columns.

    ``configs`` is a ConfigurationSet; the result S satisfies
    sum(S) = N - 2. A column outside the set raises AdmissibilityError.
    """
    bits = rmat.bits if isinstance(rmat, IndicatorMatrix) else np.atleast_2d(rmat)
    lookup = configs.lookup
    counts = np.zeros(configs.size, dtype=np.int64)
    for i in range(1, bits.shape[1] - 1):
        key = tuple(int(b) for b in bits[:, i])
        idx = lookup.get(key)
        if idx is None:
            raise AdmissibilityError(
                f"column {i} has configuration {key} outside the admissible set"
            )
        counts[idx] += 1
    return counts


class SegmentPvalues:
    """Cached rank-test p-values for one series.

    A candidate index i with previous/next change-points (i_minus, i_plus)
    determines the two compared segments, so p-values are memoized by that
    triple; samplers revisit the same triples constantly.
    """

    def __init__(self, x):
        self.x = np.ascontiguousarray(np.asarray(x, dtype=float))
        self._cache: dict[tuple[int, int, int], tuple[float, float]] = {}

    def pvalue(self, i_minus: int, i: int, i_plus: int) -> float:
        return self._entry(i_minus, i, i_plus)[0]

    def log_pvalue(self, i_minus: int, i: int, i_plus: int) -> float:
        return self._entry(i_minus, i, i_plus)[1]

    def _entry(self, i_minus: int, i: int, i_plus: int) -> tuple[float, float]:
        key = (i_minus, i, i_plus)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        left = self.x[i_minus + 1 : i + 1]
        right = self.x[i + 1 : i_plus + 1]
        p = ranktest.wilcoxon_pvalue(left, right).p
        entry = (p, math.log(max(p, P_FLOOR)))
        self._cache[key] = entry
        return entry
