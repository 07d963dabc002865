"""Domain types: grids, discretized functional samples, hypothesis families,
and the standard contrast-matrix constructions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidDesignError, InvalidGridError, InvalidHypothesisError

_GRID_SUM_RTOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Ordered evaluation points of a compact interval with quadrature weights."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        if points.ndim != 1 or points.size < 2:
            raise InvalidGridError("grid needs at least two points")
        if not np.all(np.diff(points) > 0):
            raise InvalidGridError("grid points must be strictly increasing")
        if weights.shape != points.shape:
            raise InvalidGridError("weights must match points in length")
        if not np.all(weights > 0):
            raise InvalidGridError("quadrature weights must be positive")
        length = points[-1] - points[0]
        if abs(float(weights.sum()) - length) > _GRID_SUM_RTOL * max(1.0, length):
            raise InvalidGridError("weights must sum to the interval length")

    @property
    def m(self) -> int:
        return self.points.size

    def integrate(self, values: np.ndarray) -> float:
        """Quadrature of grid-sampled values (trapezoid weights, fixed order)."""
        return float(np.dot(np.asarray(values, dtype=float), self.weights))


def make_grid(points: Sequence[float]) -> Grid:
    """Grid with trapezoidal quadrature weights on the given points."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 1 or points.size < 2:
        raise InvalidGridError("grid needs at least two points")
    if not np.all(np.isfinite(points)):
        raise InvalidGridError("grid points must be finite")
    if not np.all(np.diff(points) > 0):
        raise InvalidGridError("grid points must be strictly increasing")
    weights = np.empty_like(points)
    weights[0] = (points[1] - points[0]) / 2.0
    weights[-1] = (points[-1] - points[-2]) / 2.0
    if points.size > 2:
        weights[1:-1] = (points[2:] - points[:-2]) / 2.0
    return Grid(points=points, weights=weights)


@dataclass(frozen=True)
class FunctionalSample:
    """One group's discretized curves: an n_i x m matrix of evaluations."""

    group_id: int
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise InvalidDesignError("sample values must be a 2-d matrix")
        if values.shape[0] < 2:
            raise InvalidDesignError(
                f"group {self.group_id}: need at least 2 curves, got {values.shape[0]}"
            )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Dataset:
    """Grid plus one functional sample per group (ids 1..k, each exactly once)."""

    grid: Grid
    samples: tuple[FunctionalSample, ...]

    def __post_init__(self):
        samples = tuple(self.samples)
        object.__setattr__(self, "samples", samples)
        if len(samples) < 2:
            raise InvalidDesignError("need at least two groups")
        ids = [s.group_id for s in samples]
        if sorted(ids) != list(range(1, len(samples) + 1)):
            raise InvalidDesignError(
                f"group ids must be exactly 1..{len(samples)}, got {sorted(ids)}"
            )
        if ids != sorted(ids):
            object.__setattr__(
                self, "samples", tuple(sorted(samples, key=lambda s: s.group_id))
            )
        for s in self.samples:
            if s.m != self.grid.m:
                raise InvalidDesignError(
                    f"group {s.group_id} has {s.m} columns but the grid has {self.grid.m}"
                )

    @property
    def k(self) -> int:
        return len(self.samples)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(s.n for s in self.samples)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    def stacked_values(self) -> np.ndarray:
        """All curves stacked group-by-group into an n x m matrix."""
        return np.concatenate([s.values for s in self.samples], axis=0)


@dataclass(frozen=True)
class HypothesisFamily:
    """Block-partitioned hypothesis matrix with an optional target function.

    blocks: R matrices of shape (r_l, k); c: stacked r x m target values on the
    grid (None means identically zero).  labels name the blocks in reports.
    """

    blocks: tuple[np.ndarray, ...]
    c: Optional[np.ndarray] = None
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        blocks = []
        k = None
        for h in self.blocks:
            h = np.atleast_2d(np.asarray(h, dtype=float))
            h.setflags(write=False)
            if h.size == 0 or not np.any(h != 0):
                raise InvalidHypothesisError("hypothesis blocks must be nonzero")
            if k is None:
                k = h.shape[1]
            elif h.shape[1] != k:
                raise InvalidHypothesisError("all blocks must have the same column count")
            blocks.append(h)
        if not blocks:
            raise InvalidHypothesisError("need at least one hypothesis block")
        object.__setattr__(self, "blocks", tuple(blocks))
        if self.c is not None:
            c = np.ascontiguousarray(self.c, dtype=float)
            c.setflags(write=False)
            if c.ndim != 2 or c.shape[0] != self.r:
                raise InvalidHypothesisError(
                    f"c must have {self.r} rows (one per stacked hypothesis row)"
                )
            object.__setattr__(self, "c", c)
        labels = tuple(self.labels) or tuple(
            f"block{l + 1}" for l in range(len(blocks))
        )
        if len(labels) != len(blocks):
            raise InvalidHypothesisError("one label per block required")
        object.__setattr__(self, "labels", labels)

    @property
    def R(self) -> int:
        return len(self.blocks)

    @property
    def k(self) -> int:
        return self.blocks[0].shape[1]

    @property
    def r(self) -> int:
        return sum(h.shape[0] for h in self.blocks)

    @property
    def block_sizes(self) -> tuple[int, ...]:
        return tuple(h.shape[0] for h in self.blocks)

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacked r x k matrix and the row offsets of each block (length R+1)."""
        bounds = np.zeros(self.R + 1, dtype=np.intp)
        np.cumsum(self.block_sizes, out=bounds[1:])
        return np.ascontiguousarray(np.concatenate(self.blocks, axis=0)), bounds

    def c_on_grid(self, m: int) -> np.ndarray:
        if self.c is None:
            return np.zeros((self.r, m))
        if self.c.shape[1] != m:
            raise InvalidHypothesisError(
                f"c has {self.c.shape[1]} columns but the grid has {m}"
            )
        return self.c

    def with_c(self, c: np.ndarray) -> "HypothesisFamily":
        return HypothesisFamily(blocks=self.blocks, c=c, labels=self.labels)

    def collapsed(self) -> "HypothesisFamily":
        """The same hypothesis as a single omnibus block."""
        h, _ = self.stacked()
        return HypothesisFamily(blocks=(h,), c=self.c, labels=("global",))


def _centering_matrix(k: int) -> np.ndarray:
    # diagonal built from the same product as the off-diagonals so each row's
    # entries cancel exactly in exact arithmetic
    inv = 1.0 / k
    p = np.full((k, k), -inv)
    np.fill_diagonal(p, (k - 1) * inv)
    return p


def build_contrasts(kind: str, k: Optional[int] = None, a: Optional[int] = None,
                    b: Optional[int] = None) -> HypothesisFamily:
    """Standard contrast families.

    dunnett/tukey partition into one row per block (the multiple-testing use);
    centering and the two-way Kronecker constructions are single omnibus blocks.
    """
    if kind in ("centering", "dunnett", "tukey"):
        if k is None or k < 2:
            raise InvalidDesignError(f"{kind} contrasts need k >= 2 groups")
        if kind == "centering":
            return HypothesisFamily(
                blocks=(_centering_matrix(k),), labels=("centering",)
            )
        if kind == "dunnett":
            blocks, labels = [], []
            for j in range(2, k + 1):
                row = np.zeros((1, k))
                row[0, 0] = -1.0
                row[0, j - 1] = 1.0
                blocks.append(row)
                labels.append(f"1-{j}")
            return HypothesisFamily(blocks=tuple(blocks), labels=tuple(labels))
        blocks, labels = [], []
        for i in range(1, k):
            for j in range(i + 1, k + 1):
                row = np.zeros((1, k))
                row[0, i - 1] = -1.0
                row[0, j - 1] = 1.0
                blocks.append(row)
                labels.append(f"{i}-{j}")
        return HypothesisFamily(blocks=tuple(blocks), labels=tuple(labels))

    if kind in ("two_way_A", "two_way_B", "two_way_AB"):
        if a is None or b is None or a < 2 or b < 2:
            raise InvalidDesignError(f"{kind} contrasts need a >= 2 and b >= 2")
        if kind == "two_way_A":
            h = np.kron(_centering_matrix(a), np.full((1, b), 1.0 / b))
            label = "A"
        elif kind == "two_way_B":
            h = np.kron(np.full((1, a), 1.0 / a), _centering_matrix(b))
            label = "B"
        else:
            h = np.kron(_centering_matrix(a), _centering_matrix(b))
            label = "AB"
        return HypothesisFamily(blocks=(h,), labels=(label,))

    raise InvalidDesignError(f"unknown contrast kind {kind!r}")
