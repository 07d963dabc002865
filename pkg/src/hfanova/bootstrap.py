"""Parametric bootstrap engine: zero-mean Gaussian replicates with the
estimated group covariances, the B x R matrix of replicate statistics, and the
global test decision."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Dataset, FunctionalSample, HypothesisFamily
from .errors import InvalidHypothesisError, NumericError
from .estimate import GroupMoments, estimate_moments
from .hotelling import gph_statistic
from .numerics import (
    DEFAULT_RTOL,
    STREAM_BOOTSTRAP,
    SeedSpec,
    empirical_quantile,
    psd_factor,
)

_CHUNK = 64  # replicates per parallel task; fixed so results never depend on worker count


def default_workers() -> int:
    raw = os.environ.get("HFANOVA_WORKERS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class BootstrapConfig:
    B: int
    alpha: float
    seed: SeedSpec
    workers: int = 1

    def __post_init__(self):
        if self.B < 1:
            raise NumericError("B must be a positive integer")
        if not 0.0 < self.alpha < 1.0:
            raise NumericError("alpha must lie in (0, 1)")


@dataclass(frozen=True)
class BootstrapMatrix:
    """B x R replicate statistics; all R entries of a row share one replicate sample."""

    stats: np.ndarray
    labels: tuple[str, ...]

    @property
    def B(self) -> int:
        return self.stats.shape[0]

    @property
    def R(self) -> int:
        return self.stats.shape[1]


@dataclass(frozen=True)
class GlobalTestResult:
    statistic: float
    critical_value: float
    p_value: float
    reject: bool


def _covariance_factors(moments: GroupMoments, rtol: float) -> list[np.ndarray]:
    if moments.cov_full is None:
        raise NumericError("bootstrap needs moments with full covariance matrices")
    return [psd_factor(c, rtol=rtol) for c in moments.cov_full]


def _draw_stacked(
    sizes: tuple[int, ...], factors: list[np.ndarray], seed: SeedSpec, b: int
) -> np.ndarray:
    """All replicate-b curves stacked group-by-group, one substream per (b, i)."""
    m = factors[0].shape[0]
    out = np.empty((sum(sizes), m))
    start = 0
    for i, (ni, factor) in enumerate(zip(sizes, factors), start=1):
        rng = seed.stream(STREAM_BOOTSTRAP, b, i)
        z = rng.standard_normal((ni, m))
        out[start : start + ni] = z @ factor.T
        start += ni
    return out


def draw_bootstrap_dataset(
    dataset: Dataset,
    moments: GroupMoments,
    seed: SeedSpec,
    b: int,
    rtol: float = DEFAULT_RTOL,
) -> Dataset:
    """Replicate b: group i holds n_i independent zero-mean Gaussian curves with
    the group's estimated covariance on the grid."""
    factors = _covariance_factors(moments, rtol)
    stacked = _draw_stacked(dataset.sizes, factors, seed, b)
    samples = []
    start = 0
    for i, ni in enumerate(dataset.sizes, start=1):
        samples.append(FunctionalSample(group_id=i, values=stacked[start : start + ni]))
        start += ni
    return Dataset(grid=dataset.grid, samples=tuple(samples))


def _replicate_rows(args) -> tuple[int, np.ndarray]:
    (b_start, b_stop, sizes, factors, seed, h, bounds, weights, rtol) = args
    sizes_arr = np.asarray(sizes, dtype=np.int64)
    rows = np.empty((b_stop - b_start, bounds.size - 1))
    for idx, b in enumerate(range(b_start, b_stop)):
        values = _draw_stacked(sizes, factors, seed, b)
        rows[idx] = kernels.replicate_statistics(values, sizes_arr, h, bounds, weights, rtol)
    return b_start, rows


def bootstrap_matrix(
    dataset: Dataset,
    family: HypothesisFamily,
    config: BootstrapConfig,
    moments: GroupMoments | None = None,
    rtol: float = DEFAULT_RTOL,
) -> BootstrapMatrix:
    """B rows of replicate statistics; row b couples all blocks through the same
    replicate sample, and replicate estimators (means and covariance diagonals)
    are recomputed from each replicate with a zero target."""
    if family.k != dataset.k:
        raise InvalidHypothesisError(
            f"family is for {family.k} groups, dataset has {dataset.k}"
        )
    if moments is None or moments.cov_full is None:
        moments = estimate_moments(dataset, full_cov=True)
    factors = _covariance_factors(moments, rtol)
    h, bounds = family.stacked()
    weights = dataset.grid.weights
    tasks = [
        (b0, min(b0 + _CHUNK, config.B), dataset.sizes, factors, config.seed,
         h, bounds, weights, rtol)
        for b0 in range(0, config.B, _CHUNK)
    ]
    stats = np.empty((config.B, family.R))
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for b_start, rows in pool.map(_replicate_rows, tasks):
                stats[b_start : b_start + rows.shape[0]] = rows
    else:
        for task in tasks:
            b_start, rows = _replicate_rows(task)
            stats[b_start : b_start + rows.shape[0]] = rows
    return BootstrapMatrix(stats=stats, labels=family.labels)


def global_test(
    dataset: Dataset,
    family: HypothesisFamily,
    config: BootstrapConfig,
    rtol: float = DEFAULT_RTOL,
) -> GlobalTestResult:
    """Parametric-bootstrap calibration of the global statistic: reject iff the
    observed statistic strictly exceeds the empirical (1-alpha) replicate quantile."""
    if family.R != 1:
        raise InvalidHypothesisError(
            "global_test expects a single-block family; use family.collapsed()"
        )
    moments = estimate_moments(dataset, full_cov=True)
    observed = float(gph_statistic(dataset, family, moments=moments, rtol=rtol).per_block[0])
    matrix = bootstrap_matrix(dataset, family, config, moments=moments, rtol=rtol)
    column = matrix.stats[:, 0]
    critical = empirical_quantile(column, 1.0 - config.alpha)
    p_value = float(np.count_nonzero(column >= observed)) / config.B
    return GlobalTestResult(
        statistic=observed,
        critical_value=critical,
        p_value=p_value,
        reject=bool(observed > critical),
    )
