"""Moment estimators: group means, covariance functions, and the scaled
diagonal covariance matrix used by the pointwise statistic."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Dataset, FunctionalSample
from .errors import InsufficientSampleError


@dataclass(frozen=True)
class GroupMoments:
    """Per-group mean functions and covariance diagonals on the grid.

    cov_full holds the full m x m covariance matrices and is materialized only
    when the bootstrap needs to sample from them (memory is k * m^2).
    """

    means: np.ndarray          # k x m
    cov_diag: np.ndarray       # k x m
    cov_full: Optional[tuple[np.ndarray, ...]] = None


@dataclass(frozen=True)
class SigmaHat:
    """Diagonal of the scaled covariance matrix: entry (i, j) = (n/n_i) * cov_diag[i, j]."""

    diag: np.ndarray           # k x m


def _curve_matrix(sample) -> np.ndarray:
    if isinstance(sample, FunctionalSample):
        return sample.values
    return np.atleast_2d(np.asarray(sample, dtype=float))


def group_mean(sample) -> np.ndarray:
    """Columnwise arithmetic mean of the group's curves (sample or raw matrix)."""
    return _curve_matrix(sample).mean(axis=0)


def group_cov(sample, diag_only: bool = False) -> np.ndarray:
    """Unbiased sample covariance (divisor n_i - 1), two-pass for stability."""
    values = _curve_matrix(sample)
    if values.shape[0] < 2:
        raise InsufficientSampleError("covariance needs at least 2 curves")
    centered = values - values.mean(axis=0)
    if diag_only:
        return np.einsum("ij,ij->j", centered, centered) / (values.shape[0] - 1)
    return (centered.T @ centered) / (values.shape[0] - 1)


def estimate_moments(dataset: Dataset, full_cov: bool = False) -> GroupMoments:
    means = np.stack([group_mean(s) for s in dataset.samples])
    cov_diag = np.stack([group_cov(s, diag_only=True) for s in dataset.samples])
    cov_full = None
    if full_cov:
        cov_full = tuple(group_cov(s) for s in dataset.samples)
    return GroupMoments(means=means, cov_diag=cov_diag, cov_full=cov_full)


def sigma_hat(dataset: Dataset, moments: GroupMoments) -> SigmaHat:
    scale = dataset.n / np.asarray(dataset.sizes, dtype=float)
    return SigmaHat(diag=scale[:, None] * moments.cov_diag)
