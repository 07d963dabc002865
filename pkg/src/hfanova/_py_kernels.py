"""Pure-numpy implementations of the hot kernels.

Same contracts as the compiled module `hfanova._kernels_cy`; `hfanova.kernels`
picks one of the two at import time.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def group_moments(values: np.ndarray, sizes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-group columnwise means and unbiased variances of stacked curves.

    values: n x m with group i occupying rows sum(sizes[:i]) .. sum(sizes[:i+1]).
    """
    values = np.asarray(values, dtype=float)
    sizes = np.asarray(sizes, dtype=np.int64)
    k = sizes.size
    m = values.shape[1]
    means = np.empty((k, m))
    variances = np.empty((k, m))
    start = 0
    for i in range(k):
        stop = start + int(sizes[i])
        block = values[start:stop]
        mu = block.mean(axis=0)
        centered = block - mu
        means[i] = mu
        variances[i] = np.einsum("ij,ij->j", centered, centered) / (sizes[i] - 1)
        start = stop
    return means, variances


def block_statistics(
    means: np.ndarray,
    sigma: np.ndarray,
    h: np.ndarray,
    c: np.ndarray | None,
    bounds: np.ndarray,
    n_total: float,
    weights: np.ndarray,
    rtol: float,
    pointwise: bool = False,
):
    """Integrated per-block quadratic-form statistics.

    For block l with rows H_l (r_l x k): at each grid point j,
    TF = n * d' A+ d with d = H_l mean(:,j) - c(rows,j) and
    A = H_l diag(sigma(:,j)) H_l'; the block statistic is the weighted sum of TF.
    Pseudoinverse rank cut: eigenvalues <= rtol * lambda_max count as zero.
    """
    means = np.asarray(means, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    h = np.asarray(h, dtype=float)
    bounds = np.asarray(bounds, dtype=np.intp)
    weights = np.asarray(weights, dtype=float)
    n_blocks = bounds.size - 1
    m = means.shape[1]
    stats = np.empty(n_blocks)
    tf_all = np.empty((n_blocks, m)) if pointwise else None

    for l in range(n_blocks):
        rows = slice(int(bounds[l]), int(bounds[l + 1]))
        hb = h[rows]
        d = hb @ means
        if c is not None:
            d = d - c[rows]
        r = hb.shape[0]
        if r == 1:
            a = (hb[0] ** 2) @ sigma                      # (m,)
            num = n_total * d[0] ** 2
            tf = np.divide(num, a, out=np.zeros(m), where=a > 0)
        else:
            a = np.einsum("ik,km,jk->mij", hb, sigma, hb)  # (m, r, r)
            w, v = np.linalg.eigh(a)
            cutoff = rtol * np.maximum(w[:, -1], 0.0)
            keep = w > cutoff[:, None]
            inv_w = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
            proj = np.einsum("mij,im->mj", v, d)           # V' d per point
            tf = n_total * np.einsum("mj,mj->m", proj**2, inv_w)
        stats[l] = float(np.dot(tf, weights))
        if pointwise:
            tf_all[l] = tf
    if pointwise:
        return stats, tf_all
    return stats


def replicate_statistics(
    values: np.ndarray,
    sizes: np.ndarray,
    h: np.ndarray,
    bounds: np.ndarray,
    weights: np.ndarray,
    rtol: float,
) -> np.ndarray:
    """Fused per-replicate path: moments of the replicate curves, the scaled
    covariance diagonal, then the zero-target block statistics."""
    sizes = np.asarray(sizes, dtype=np.int64)
    n_total = float(sizes.sum())
    means, variances = group_moments(values, sizes)
    sigma = (n_total / sizes.astype(float))[:, None] * variances
    return block_statistics(
        means, sigma, h, None, bounds, n_total, weights, rtol, pointwise=False
    )
