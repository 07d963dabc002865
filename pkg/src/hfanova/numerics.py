"""Shared numerical kernels: symmetric pseudoinverse, PSD factorization for
Gaussian sampling, empirical quantiles, and reproducible random substreams."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveSemidefiniteError, NumericError

DEFAULT_RTOL = 1e-10

# Substream domains; each (domain, b, i) triple owns its own Philox counter range.
STREAM_BOOTSTRAP = 1
STREAM_SIMULATION = 2
STREAM_POOLED = 3
STREAM_GROUPWISE = 4

_SNAP = 1e-9


def snap_floor(x: float) -> int:
    """floor(x), treating values within relative 1e-9 of an integer as that integer.

    Guards index arithmetic like floor(B*alpha) against float noise in the product
    (0.3 * 1000 = 299.999...), without changing genuinely fractional values.
    """
    r = round(x)
    if abs(x - r) <= _SNAP * max(1.0, abs(x)):
        return int(r)
    return math.floor(x)


def snap_ceil(x: float) -> int:
    r = round(x)
    if abs(x - r) <= _SNAP * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)


def empirical_quantile(x: np.ndarray, p: float) -> float:
    """The ceil(p*B)-th order statistic of x (type-1 / inverse-CDF convention).

    p = 1 returns the maximum. This convention guarantees the exceedance bound
    #{x_b > q} <= (1-p)*B used by the critical-value search.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise NumericError("empirical_quantile: empty sample")
    if not 0.0 < p <= 1.0:
        raise NumericError(f"empirical_quantile: p={p} outside (0, 1]")
    rank = max(1, snap_ceil(p * x.size))
    return float(np.sort(x)[rank - 1])


def _symmetric_eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NumericError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericError("matrix has non-finite entries")
    return np.linalg.eigh((m + m.T) / 2.0)


def pinv(m: np.ndarray, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """Moore-Penrose inverse of a symmetric matrix via eigendecomposition.

    Eigenvalues <= rtol * lambda_max are treated as zero rank.
    """
    w, v = _symmetric_eigh(m)
    cutoff = rtol * max(w[-1], 0.0)
    inv_w = np.where(w > cutoff, 1.0 / np.where(w > cutoff, w, 1.0), 0.0)
    return (v * inv_w) @ v.T


def psd_factor(s: np.ndarray, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """Factor L with L @ L.T ~= s for a symmetric PSD matrix s.

    Works on the correlation scale: s is rescaled by its diagonal before the
    eigendecomposition and the factor is rescaled back.  This keeps the factor
    compatible with pointwise scaling of the data (L(DSD) ~= |D| L(S)), which the
    scale-invariance contracts of the bootstrap rely on.  Eigenvalues below
    rtol * lambda_max (including round-off negatives) are clipped to zero;
    anything more negative than 10x that raises.
    """
    s = np.asarray(s, dtype=float)
    d = np.diag(s).copy()
    dmax = max(float(d.max(initial=0.0)), 0.0)
    if np.any(d < -10.0 * rtol * dmax):
        raise NotPositiveSemidefiniteError("negative diagonal entry beyond round-off")
    alive = d > 0
    scale = np.where(alive, np.sqrt(np.where(alive, d, 1.0)), 1.0)
    corr = s / np.outer(scale, scale)
    corr[~alive, :] = 0.0
    corr[:, ~alive] = 0.0
    w, v = _symmetric_eigh(corr)
    wmax = max(w[-1], 0.0)
    if w[0] < -10.0 * rtol * wmax:
        raise NotPositiveSemidefiniteError(
            f"eigenvalue {w[0]:.3e} below PSD round-off tolerance"
        )
    w = np.where(w > rtol * wmax, w, 0.0)
    return (scale[:, None] * v) * np.sqrt(w)


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus a deterministic substream derivation rule.

    Substream (domain, b, i) maps to a Philox generator whose counter encodes the
    identifiers in the slow words, so draws are identical regardless of execution
    order or worker count, and distinct identifiers never share counter space.
    """

    master_seed: int

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise NumericError("master_seed must fit in an unsigned 64-bit integer")

    def stream(self, domain: int, b: int = 0, i: int = 0) -> np.random.Generator:
        counter = np.array([0, b, i, domain], dtype=np.uint64)
        return np.random.Generator(
            np.random.Philox(key=np.uint64(self.master_seed), counter=counter)
        )

    def child(self, *ids: int) -> "SeedSpec":
        """Derive an independent child seed (for nested resampling layers)."""
        seq = np.random.SeedSequence(entropy=int(self.master_seed), spawn_key=tuple(ids))
        return SeedSpec(int(seq.generate_state(1, np.uint64)[0]))


def gaussian_vector(stream: np.random.Generator, factor: np.ndarray) -> np.ndarray:
    """One draw L @ z with z iid standard normal from the given substream."""
    z = stream.standard_normal(factor.shape[1])
    return factor @ z
