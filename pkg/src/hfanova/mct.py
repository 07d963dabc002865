"""Multiple contrast testing: the critical-level search over the bootstrap
quantile grid, coherent local/global decisions, adjusted p-values, and
simultaneous confidence-region membership."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bootstrap import BootstrapConfig, BootstrapMatrix, bootstrap_matrix
from .core import Dataset, HypothesisFamily
from .errors import InvalidHypothesisError, NumericError
from .estimate import estimate_moments
from .hotelling import gph_statistic
from .numerics import DEFAULT_RTOL, empirical_quantile, snap_floor


@dataclass(frozen=True)
class MctResult:
    observed: np.ndarray       # (R,)
    beta_tilde: float
    critical: np.ndarray       # (R,) quantiles at level 1 - beta_tilde
    local_reject: np.ndarray   # (R,) bool
    global_reject: bool
    adjusted_p: np.ndarray     # (R,)
    labels: tuple[str, ...]
    alpha: float
    B: int


def fwer_at(beta: float, matrix: BootstrapMatrix) -> float:
    """Fraction of replicate rows exceeding the per-column (1-beta) quantiles."""
    if not 0.0 <= beta < 1.0:
        raise NumericError("beta must lie in [0, 1)")
    stats = matrix.stats
    q = np.array([empirical_quantile(stats[:, l], 1.0 - beta) for l in range(matrix.R)])
    return float(np.count_nonzero((stats > q).any(axis=1))) / matrix.B


def _descending_ranks(stats: np.ndarray) -> np.ndarray:
    """ranks[b, l] = #{b': stats[b', l] >= stats[b, l]} (ties counted)."""
    B = stats.shape[0]
    ranks = np.empty_like(stats, dtype=np.int64)
    for l in range(stats.shape[1]):
        col = np.sort(stats[:, l])
        ranks[:, l] = B - np.searchsorted(col, stats[:, l], side="left")
    return ranks


def _observed_ranks(stats: np.ndarray, observed: np.ndarray) -> np.ndarray:
    """ranks[l] = #{b: stats[b, l] >= observed[l]}; observed exceeds the
    (1 - t/B) quantile of its column exactly when ranks[l] <= t."""
    B = stats.shape[0]
    out = np.empty(observed.shape[0], dtype=np.int64)
    for l in range(observed.shape[0]):
        col = np.sort(stats[:, l])
        out[l] = B - np.searchsorted(col, observed[l], side="left")
    return out


def _beta_index(row_min_sorted: np.ndarray, j_alpha: int, R: int, B: int) -> int:
    """Largest t on the quantile grid, restricted to [floor(j_alpha/R), j_alpha],
    whose approximated family-wise error stays within j_alpha/B."""
    hi = min(j_alpha, B - 1)
    feasible = (int(row_min_sorted[j_alpha]) - 1) if j_alpha < B else B - 1
    lo = j_alpha // R
    return max(lo, min(hi, feasible))


def beta_tilde(matrix: BootstrapMatrix, alpha: float) -> float:
    """Largest beta in {0, 1/B, ..., (B-1)/B}, restricted to the interval
    [floor(B*alpha/R)/B, alpha], with fwer_at(beta) <= alpha."""
    if not 0.0 < alpha < 1.0:
        raise NumericError("alpha must lie in (0, 1)")
    ranks = _descending_ranks(matrix.stats)
    row_min = np.sort(ranks.min(axis=1))
    j_alpha = snap_floor(matrix.B * alpha)
    return _beta_index(row_min, j_alpha, matrix.R, matrix.B) / matrix.B


def _criticals(stats: np.ndarray, t: int) -> np.ndarray:
    """Per-column (B - t)-th order statistics, i.e. the (1 - t/B) quantiles."""
    B = stats.shape[0]
    return np.sort(stats, axis=0)[B - t - 1]


def adjusted_pvalues(observed: np.ndarray, matrix: BootstrapMatrix) -> np.ndarray:
    """Smallest level on {1/B, ..., 1} at which the procedure run on this matrix
    rejects each hypothesis; 1.0 when no level rejects."""
    observed = np.asarray(observed, dtype=float)
    if observed.shape[0] != matrix.R:
        raise InvalidHypothesisError("observed must have one entry per block")
    B, R = matrix.B, matrix.R
    ranks = _descending_ranks(matrix.stats)
    row_min = np.sort(ranks.min(axis=1))
    obs_rank = _observed_ranks(matrix.stats, observed)
    j_grid = np.arange(1, B + 1)
    hi = np.minimum(j_grid, B - 1)
    feasible = np.empty(B, dtype=np.int64)
    feasible[: B - 1] = row_min[1:] - 1
    feasible[B - 1] = B - 1
    # the union bound guarantees min(hi, feasible) >= floor(j/R), the interval's
    # lower endpoint, so no explicit clamp is needed here
    t_of = np.minimum(hi, feasible)
    # t_of is nondecreasing, so the first rejecting level is a sorted lookup
    idx = np.searchsorted(t_of, obs_rank, side="left")
    return np.where(idx < B, (idx + 1) / B, 1.0)


def mct_from_matrix(
    observed: np.ndarray, matrix: BootstrapMatrix, alpha: float
) -> MctResult:
    """The multiple-testing decisions implied by an already-computed bootstrap
    matrix (shared by `mct_test` and by callers holding the matrix)."""
    observed = np.asarray(observed, dtype=float)
    if observed.shape[0] != matrix.R:
        raise InvalidHypothesisError("observed must have one entry per block")
    if not 0.0 < alpha < 1.0:
        raise NumericError("alpha must lie in (0, 1)")
    ranks = _descending_ranks(matrix.stats)
    row_min = np.sort(ranks.min(axis=1))
    j_alpha = snap_floor(matrix.B * alpha)
    t = _beta_index(row_min, j_alpha, matrix.R, matrix.B)
    critical = _criticals(matrix.stats, t)
    obs_rank = _observed_ranks(matrix.stats, observed)
    local = obs_rank <= t
    return MctResult(
        observed=observed,
        beta_tilde=t / matrix.B,
        critical=critical,
        local_reject=local,
        global_reject=bool(local.any()),
        adjusted_p=adjusted_pvalues(observed, matrix),
        labels=matrix.labels,
        alpha=alpha,
        B=matrix.B,
    )


def mct_test(
    dataset: Dataset,
    family: HypothesisFamily,
    config: BootstrapConfig,
    rtol: float = DEFAULT_RTOL,
) -> MctResult:
    """Coherent multiple contrast test: one bootstrap matrix feeds the critical-
    level search, all local decisions, the global decision, and adjusted p-values.

    A hypothesis is rejected exactly when its statistic strictly exceeds its
    critical value (so an observed 0 against a critical 0 never rejects), and the
    global hypothesis is rejected exactly when some local one is.
    """
    moments = estimate_moments(dataset, full_cov=True)
    observed = gph_statistic(dataset, family, moments=moments, rtol=rtol).per_block
    matrix = bootstrap_matrix(dataset, family, config, moments=moments, rtol=rtol)
    return mct_from_matrix(observed, matrix, config.alpha)


def confidence_region_contains(
    dataset: Dataset,
    family: HypothesisFamily,
    block_index: int,
    xi: np.ndarray,
    result: MctResult,
    rtol: float = DEFAULT_RTOL,
) -> bool:
    """Membership of a grid-aligned candidate in the simultaneous confidence
    region of block l: statistic at target xi stays within the critical value."""
    block = family.blocks[block_index]
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if xi.shape != (block.shape[0], dataset.grid.m):
        raise InvalidHypothesisError(
            f"candidate must have shape {(block.shape[0], dataset.grid.m)}, got {xi.shape}"
        )
    single = HypothesisFamily(blocks=(block,), c=xi, labels=(family.labels[block_index],))
    stat = float(gph_statistic(dataset, single, rtol=rtol).per_block[0])
    return stat <= float(result.critical[block_index])
