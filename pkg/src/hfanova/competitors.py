"""Reference implementations of the comparison tests: Fmax and GPF with a
pooled nonparametric bootstrap, L2b and Fb with a groupwise one.

All four are global tests; replicate statistics are recentered at the fitted
combination (c* = H eta-hat) so replicates are generated under the null.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .bootstrap import BootstrapConfig
from .core import Dataset, HypothesisFamily
from .errors import InvalidHypothesisError
from .estimate import GroupMoments, estimate_moments
from .numerics import DEFAULT_RTOL, STREAM_GROUPWISE, STREAM_POOLED, pinv


@dataclass(frozen=True)
class CompetitorResult:
    statistic: float
    p_value: float
    method: str


def _size_quadratic(h: np.ndarray, sizes: tuple[int, ...]) -> np.ndarray:
    """(H D H')^-1 with D = diag(1/n_i); pseudoinverse absorbs rank deficiency."""
    d = 1.0 / np.asarray(sizes, dtype=float)
    return pinv((h * d) @ h.T, rtol=DEFAULT_RTOL)


def _ssh_curve(means: np.ndarray, h: np.ndarray, c: np.ndarray, g: np.ndarray) -> np.ndarray:
    """SSH over the grid: (H m - c)' G (H m - c) at each point, G constant."""
    d = h @ means - c
    return np.einsum("rm,rs,sm->m", d, g, d)


def ssh_pointwise(
    dataset: Dataset,
    moments: GroupMoments,
    h: np.ndarray,
    c_at_point: np.ndarray,
    point_index: int,
) -> float:
    h = np.atleast_2d(np.asarray(h, dtype=float))
    if h.shape[1] != dataset.k:
        raise InvalidHypothesisError(
            f"hypothesis has {h.shape[1]} columns for {dataset.k} groups"
        )
    g = _size_quadratic(h, dataset.sizes)
    d = h @ moments.means[:, point_index] - np.atleast_1d(np.asarray(c_at_point, float))
    return float(d @ g @ d)


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """num/den with the degenerate conventions 0/0 := 0 and x/0 := inf (x > 0)."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    blown = (den <= 0) & (num > 0)
    if np.any(blown):
        out = np.where(blown, np.inf, out)
    return out


def _f_curve(ssh: np.ndarray, cov_diag: np.ndarray, sizes, r: int) -> np.ndarray:
    sizes = np.asarray(sizes, dtype=float)
    pooled = (sizes - 1) @ cov_diag / (sizes.sum() - sizes.size)
    return _ratio(ssh / r, pooled)


def _anorm_diag(h: np.ndarray, sizes: tuple[int, ...]) -> np.ndarray:
    """Diagonal of D^1/2 H' (H D H')^-1 H D^1/2 (a projection when H has full row rank)."""
    droot = np.sqrt(1.0 / np.asarray(sizes, dtype=float))
    g = _size_quadratic(h, sizes)
    hd = h * droot
    return np.einsum("ri,rs,si->i", hd, g, hd)


def _fmax_gpf_pair(ssh, cov_diag, sizes, r, weights):
    curve = _f_curve(ssh, cov_diag, sizes, r)
    return float(curve.max()), float(np.dot(curve, weights))


def _l2b_fb_pair(ssh, cov_diag, a_diag, weights):
    l2b = float(np.dot(ssh, weights))
    den = float(a_diag @ (cov_diag @ weights))
    fb = float(_ratio(np.array(l2b), np.array(den)))
    return l2b, fb


def _group_slices(sizes: tuple[int, ...]) -> list[slice]:
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    return [slice(int(bounds[i]), int(bounds[i + 1])) for i in range(len(sizes))]


def _prepare(dataset: Dataset, family: HypothesisFamily):
    if family.k != dataset.k:
        raise InvalidHypothesisError(
            f"family is for {family.k} groups, dataset has {dataset.k}"
        )
    moments = estimate_moments(dataset)
    blocks = list(family.blocks)
    c = family.c_on_grid(dataset.grid.m)
    _, bounds = family.stacked()
    c_blocks = [c[int(bounds[l]) : int(bounds[l + 1])] for l in range(family.R)]
    return moments, blocks, c_blocks


def fmax_gpf_batch(
    dataset: Dataset, family: HypothesisFamily, config: BootstrapConfig
) -> tuple[list[CompetitorResult], list[CompetitorResult]]:
    """Fmax and GPF per block, all blocks sharing a pooled-bootstrap replicate:
    replicate residual curves are drawn with replacement from the pooled centered
    residuals and re-attached to the fitted group means."""
    moments, blocks, c_blocks = _prepare(dataset, family)
    sizes = dataset.sizes
    sizes_arr = np.asarray(sizes, dtype=np.int64)
    weights = dataset.grid.weights
    gs = [_size_quadratic(h, sizes) for h in blocks]
    ranks = [h.shape[0] for h in blocks]
    centers = [h @ moments.means for h in blocks]

    observed = [
        _fmax_gpf_pair(
            _ssh_curve(moments.means, h, cb, g), moments.cov_diag, sizes, r, weights
        )
        for h, cb, g, r in zip(blocks, c_blocks, gs, ranks)
    ]

    values = dataset.stacked_values()
    residuals = values - np.repeat(moments.means, sizes_arr, axis=0)
    fitted = np.repeat(moments.means, sizes_arr, axis=0)
    n = values.shape[0]
    exceed = np.zeros((len(blocks), 2), dtype=np.int64)
    for b in range(config.B):
        rng = config.seed.stream(STREAM_POOLED, b, 0)
        idx = rng.integers(0, n, size=n)
        rep = residuals[idx] + fitted
        means, variances = kernels.group_moments(rep, sizes_arr)
        for l, (h, g, r) in enumerate(zip(blocks, gs, ranks)):
            ssh = _ssh_curve(means, h, centers[l], g)
            fmax, gpf = _fmax_gpf_pair(ssh, variances, sizes, r, weights)
            exceed[l, 0] += fmax >= observed[l][0]
            exceed[l, 1] += gpf >= observed[l][1]

    fmax_results = [
        CompetitorResult(observed[l][0], exceed[l, 0] / config.B, "Fmax")
        for l in range(len(blocks))
    ]
    gpf_results = [
        CompetitorResult(observed[l][1], exceed[l, 1] / config.B, "GPF")
        for l in range(len(blocks))
    ]
    return fmax_results, gpf_results


def l2b_fb_batch(
    dataset: Dataset, family: HypothesisFamily, config: BootstrapConfig
) -> tuple[list[CompetitorResult], list[CompetitorResult]]:
    """L2b and Fb per block with a groupwise bootstrap: each replicate resamples
    curves with replacement within every group."""
    moments, blocks, c_blocks = _prepare(dataset, family)
    sizes = dataset.sizes
    sizes_arr = np.asarray(sizes, dtype=np.int64)
    weights = dataset.grid.weights
    gs = [_size_quadratic(h, sizes) for h in blocks]
    a_diags = [_anorm_diag(h, sizes) for h in blocks]
    centers = [h @ moments.means for h in blocks]

    observed = [
        _l2b_fb_pair(
            _ssh_curve(moments.means, h, cb, g), moments.cov_diag, a_diag, weights
        )
        for h, cb, g, a_diag in zip(blocks, c_blocks, gs, a_diags)
    ]

    slices = _group_slices(sizes)
    values = dataset.stacked_values()
    rep = np.empty_like(values)
    exceed = np.zeros((len(blocks), 2), dtype=np.int64)
    for b in range(config.B):
        for i, sl in enumerate(slices, start=1):
            rng = config.seed.stream(STREAM_GROUPWISE, b, i)
            group = values[sl]
            rep[sl] = group[rng.integers(0, group.shape[0], size=group.shape[0])]
        means, variances = kernels.group_moments(rep, sizes_arr)
        for l, (h, g, a_diag) in enumerate(zip(blocks, gs, a_diags)):
            ssh = _ssh_curve(means, h, centers[l], g)
            l2b, fb = _l2b_fb_pair(ssh, variances, a_diag, weights)
            exceed[l, 0] += l2b >= observed[l][0]
            exceed[l, 1] += fb >= observed[l][1]

    l2b_results = [
        CompetitorResult(observed[l][0], exceed[l, 0] / config.B, "L2b")
        for l in range(len(blocks))
    ]
    fb_results = [
        CompetitorResult(observed[l][1], exceed[l, 1] / config.B, "Fb")
        for l in range(len(blocks))
    ]
    return l2b_results, fb_results


def fmax_gpf(
    dataset: Dataset, family: HypothesisFamily, config: BootstrapConfig
) -> tuple[CompetitorResult, CompetitorResult]:
    """Fmax and GPF for the family treated as one global hypothesis."""
    fmax_results, gpf_results = fmax_gpf_batch(dataset, family.collapsed(), config)
    return fmax_results[0], gpf_results[0]


def l2b_fb(
    dataset: Dataset, family: HypothesisFamily, config: BootstrapConfig
) -> tuple[CompetitorResult, CompetitorResult]:
    """L2b and Fb for the family treated as one global hypothesis."""
    l2b_results, fb_results = l2b_fb_batch(dataset, family.collapsed(), config)
    return l2b_results[0], fb_results[0]
