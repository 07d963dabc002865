"""The pointwise Hotelling-type statistic and its integrated (GPH) form,
evaluated per hypothesis block."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .core import Dataset, HypothesisFamily
from .errors import InvalidHypothesisError
from .estimate import GroupMoments, SigmaHat, estimate_moments, sigma_hat
from .numerics import DEFAULT_RTOL, pinv


@dataclass(frozen=True)
class StatisticVector:
    """Per-block integrated statistics, optionally with the pointwise values."""

    per_block: np.ndarray               # (R,)
    pointwise: Optional[np.ndarray] = None  # (R, m)


def pointwise_statistic(
    dataset: Dataset,
    moments: GroupMoments,
    sigma: SigmaHat,
    h: np.ndarray,
    c_at_point: np.ndarray,
    point_index: int,
    rtol: float = DEFAULT_RTOL,
) -> float:
    """The pointwise statistic n (H m - c)' (H S H')+ (H m - c) at one grid point."""
    h = np.atleast_2d(np.asarray(h, dtype=float))
    if h.shape[1] != dataset.k:
        raise InvalidHypothesisError(
            f"hypothesis has {h.shape[1]} columns for {dataset.k} groups"
        )
    c_at_point = np.atleast_1d(np.asarray(c_at_point, dtype=float))
    if c_at_point.shape[0] != h.shape[0]:
        raise InvalidHypothesisError("c must have one entry per hypothesis row")
    d = h @ moments.means[:, point_index] - c_at_point
    a = (h * sigma.diag[:, point_index]) @ h.T
    return float(dataset.n * d @ pinv(a, rtol=rtol) @ d)


def gph_statistic(
    dataset: Dataset,
    family: HypothesisFamily,
    moments: Optional[GroupMoments] = None,
    rtol: float = DEFAULT_RTOL,
    want_pointwise: bool = False,
) -> StatisticVector:
    """Integrated pointwise statistic per hypothesis block (trapezoid weights)."""
    if family.k != dataset.k:
        raise InvalidHypothesisError(
            f"family is for {family.k} groups, dataset has {dataset.k}"
        )
    if moments is None:
        moments = estimate_moments(dataset)
    sigma = sigma_hat(dataset, moments)
    h, bounds = family.stacked()
    c = family.c_on_grid(dataset.grid.m) if family.c is not None else None
    out = kernels.block_statistics(
        moments.means,
        sigma.diag,
        h,
        c,
        bounds,
        float(dataset.n),
        dataset.grid.weights,
        rtol,
        pointwise=want_pointwise,
    )
    if want_pointwise:
        stats, tf = out
        return StatisticVector(per_block=stats, pointwise=tf)
    return StatisticVector(per_block=out)
