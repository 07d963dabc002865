"""Monte-Carlo study harness: trigonometric-basis data generating process,
null/alternative scenarios, and rejection-rate tables over all methods."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bootstrap import BootstrapConfig, bootstrap_matrix, default_workers
from .competitors import fmax_gpf_batch, l2b_fb_batch
from .core import Dataset, FunctionalSample, HypothesisFamily, build_contrasts, make_grid
from .errors import InvalidDesignError, NumericError
from .estimate import estimate_moments
from .hotelling import gph_statistic
from .mct import _beta_index, _descending_ranks, _observed_ranks
from .numerics import STREAM_SIMULATION, SeedSpec, snap_floor

GRID_POINTS = 50          # equidistant evaluation points of [0, 1]
BASIS_TERMS = 10
BASE_SIZES = (15, 20, 25, 30)

DISTRIBUTIONS = ("normal", "t5", "chisq5")
PAIRINGS = ("homoscedastic", "positive_pairing", "negative_pairing")
SCALINGS = ("none", "inverse_shift")
ALTERNATIVES = ("null", "A1", "A2", "A3", "A4", "A5", "A6")
METHODS = ("Fmax", "GPF", "L2b", "Fb", "GPH", "mGPH")
_REP_TAG = 101  # child-seed namespace for per-repetition bootstrap layers


@dataclass(frozen=True)
class ScenarioSpec:
    distribution: str = "normal"
    size_factor: int = 1
    lambdas: str = "homoscedastic"
    scaling: str = "none"
    contrast: str = "dunnett"
    alternative: str = "null"
    reps: int = 500
    B: int = 500
    alpha: float = 0.05
    seed: SeedSpec = field(default_factory=lambda: SeedSpec(0))

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise InvalidDesignError(f"unknown distribution {self.distribution!r}")
        if self.lambdas not in PAIRINGS:
            raise InvalidDesignError(f"unknown pairing {self.lambdas!r}")
        if self.scaling not in SCALINGS:
            raise InvalidDesignError(f"unknown scaling {self.scaling!r}")
        if self.contrast not in ("dunnett", "tukey"):
            raise InvalidDesignError("study contrasts are dunnett or tukey")
        if self.alternative not in ALTERNATIVES:
            raise InvalidDesignError(f"unknown alternative {self.alternative!r}")
        if self.size_factor not in (1, 2, 4):
            raise InvalidDesignError("size_factor must be 1, 2 or 4")
        if self.alternative != "null" and self.size_factor != 1:
            raise InvalidDesignError("alternative scenarios use size_factor 1")
        if self.reps < 0 or self.B < 1:
            raise NumericError("reps must be >= 0 and B >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise NumericError("alpha must lie in (0, 1)")

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(self.size_factor * s for s in BASE_SIZES)

    @property
    def lambda_values(self) -> tuple[float, ...]:
        if self.lambdas == "homoscedastic":
            return (1.0, 1.0, 1.0, 1.0)
        if self.lambdas == "positive_pairing":
            return tuple(0.75 + 0.25 * i for i in (1, 2, 3, 4))
        return tuple(2.0 - 0.25 * i for i in (1, 2, 3, 4))

    def to_dict(self) -> dict:
        return {
            "distribution": self.distribution,
            "size_factor": self.size_factor,
            "sizes": list(self.sizes),
            "lambdas": self.lambdas,
            "scaling": self.scaling,
            "contrast": self.contrast,
            "alternative": self.alternative,
            "reps": self.reps,
            "B": self.B,
            "alpha": self.alpha,
            "seed": self.seed.master_seed,
        }


@dataclass(frozen=True)
class StudyReport:
    spec: ScenarioSpec
    methods: tuple[str, ...]
    labels: tuple[str, ...]
    rejection_counts: dict      # method -> np.ndarray (R,) of rejection counts
    fwer_counts: dict           # method -> int (reps with a true-null rejection)
    true_null: tuple[bool, ...]
    wall_time: float            # not serialized: reports must be byte-stable
    decisions: Optional[dict] = None  # method -> (reps, R) bool array, on request

    def rate_percent(self, method: str, label: str) -> float:
        idx = self.labels.index(label)
        return 100.0 * self.rejection_counts[method][idx] / max(1, self.spec.reps)

    def fwer_percent(self, method: str) -> float:
        return 100.0 * self.fwer_counts[method] / max(1, self.spec.reps)

    def to_json_dict(self) -> dict:
        rates = {}
        for method in self.methods:
            per = {
                label: self.rate_percent(method, label) for label in self.labels
            }
            per["FWER"] = self.fwer_percent(method)
            rates[method] = per
        return {
            "schema": "hfanova-study-report-v1",
            "kind": "study",
            "spec": self.spec.to_dict(),
            "methods": list(self.methods),
            "hypotheses": list(self.labels),
            "true_null": list(self.true_null),
            "rates_percent": rates,
        }


def _basis(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q = np.arange(1, BASIS_TERMS + 1, dtype=float)[:, None]
    sin_basis = np.sqrt(2.0 / q) * np.sin(np.pi * q * points[None, :])
    cos_basis = np.sqrt(1.0 / q) * np.cos(np.pi * q * points[None, :])
    return sin_basis, cos_basis


def _mean_functions(alternative: str) -> np.ndarray:
    """Group mean curves; the formulas index grid points by t = 1..J."""
    j = GRID_POINTS
    t = np.arange(1, j + 1, dtype=float)
    mu = np.zeros((4, j))
    ramp_up = (t - 1.0) / (j - 1.0)
    ramp_down = (j - t) / j
    if alternative == "A1":
        mu[3] = 2.0 * ramp_up
    elif alternative == "A2":
        mu[3] = 1.5
    elif alternative == "A3":
        mu[1], mu[2], mu[3] = 0.75, 1.5, 2.25
    elif alternative == "A4":
        mu[1], mu[2], mu[3] = ramp_up, 2.0 * ramp_up, 3.0 * ramp_up
    elif alternative == "A5":
        mu[3] = 2.0 * ramp_down
    elif alternative == "A6":
        mu[1], mu[2], mu[3] = ramp_down, 2.0 * ramp_down, 3.0 * ramp_down
    return mu


def _scaling_values(kind: str, points: np.ndarray) -> Optional[np.ndarray]:
    if kind == "none":
        return None
    return 1.0 / (points + 1.0 / GRID_POINTS)


def _standardized_draws(rng: np.random.Generator, distribution: str, shape) -> np.ndarray:
    if distribution == "normal":
        return rng.standard_normal(shape)
    if distribution == "t5":
        return rng.standard_t(5, shape) / math.sqrt(5.0 / 3.0)
    return (rng.chisquare(5, shape) - 5.0) / math.sqrt(10.0)


def generate_curves(spec: ScenarioSpec, rep: int) -> Dataset:
    """One simulated dataset: x_ij = mu_i + h * lambda_i * (basis expansion of
    standardized innovations); the scaling h is applied after the innovations so
    scaled and unscaled runs share them exactly."""
    points = np.linspace(0.0, 1.0, GRID_POINTS)
    sin_basis, cos_basis = _basis(points)
    mu = _mean_functions(spec.alternative)
    h = _scaling_values(spec.scaling, points)
    samples = []
    for i, (ni, lam) in enumerate(zip(spec.sizes, spec.lambda_values), start=1):
        rng = spec.seed.stream(STREAM_SIMULATION, rep, i)
        draws = _standardized_draws(rng, spec.distribution, (ni, 2 * BASIS_TERMS))
        noise = draws[:, :BASIS_TERMS] @ sin_basis + draws[:, BASIS_TERMS:] @ cos_basis
        noise *= lam
        if h is not None:
            noise *= h
        samples.append(FunctionalSample(group_id=i, values=noise + mu[i - 1]))
    return Dataset(grid=make_grid(points), samples=tuple(samples))


def true_null_mask(spec: ScenarioSpec, family: HypothesisFamily) -> tuple[bool, ...]:
    mu = _mean_functions(spec.alternative)
    return tuple(bool(np.all(block @ mu == 0.0)) for block in family.blocks)


def _run_rep_block(args) -> tuple[dict, dict, dict]:
    spec, methods, rep_range = args
    family = build_contrasts(spec.contrast, k=4)
    R = family.R
    j_alpha = snap_floor(spec.B * spec.alpha)
    bonf = snap_floor(spec.B * spec.alpha / R)
    counts = {m: np.zeros(R, dtype=np.int64) for m in methods}
    fwer = {m: 0 for m in methods}
    null_mask = np.asarray(true_null_mask(spec, family))
    decisions = {m: np.zeros((len(rep_range), R), dtype=bool) for m in methods}

    def _bonferroni(results):
        # Bonferroni at level alpha: R * (count/B) <= alpha, compared on counts
        return np.array(
            [round(r.p_value * spec.B) <= bonf for r in results], dtype=bool
        )

    for pos, rep in enumerate(rep_range):
        data = generate_curves(spec, rep)
        rep_seed = spec.seed.child(_REP_TAG, rep)
        config = BootstrapConfig(B=spec.B, alpha=spec.alpha, seed=rep_seed)
        local: dict[str, np.ndarray] = {}

        if "mGPH" in methods or "GPH" in methods:
            moments = estimate_moments(data, full_cov=True)
            observed = gph_statistic(data, family, moments=moments).per_block
            matrix = bootstrap_matrix(data, family, config, moments=moments)
            obs_rank = _observed_ranks(matrix.stats, observed)
            if "mGPH" in methods:
                row_min = np.sort(_descending_ranks(matrix.stats).min(axis=1))
                t = _beta_index(row_min, j_alpha, R, spec.B)
                local["mGPH"] = obs_rank <= t
            if "GPH" in methods:
                local["GPH"] = obs_rank <= bonf
        if "Fmax" in methods or "GPF" in methods:
            fmax_res, gpf_res = fmax_gpf_batch(data, family, config)
            if "Fmax" in methods:
                local["Fmax"] = _bonferroni(fmax_res)
            if "GPF" in methods:
                local["GPF"] = _bonferroni(gpf_res)
        if "L2b" in methods or "Fb" in methods:
            l2b_res, fb_res = l2b_fb_batch(data, family, config)
            if "L2b" in methods:
                local["L2b"] = _bonferroni(l2b_res)
            if "Fb" in methods:
                local["Fb"] = _bonferroni(fb_res)

        for m in methods:
            counts[m] += local[m]
            fwer[m] += bool(np.any(local[m] & null_mask))
            decisions[m][pos] = local[m]
    return counts, fwer, decisions


def run_study(
    spec: ScenarioSpec,
    methods: tuple[str, ...] = ("mGPH",),
    workers: Optional[int] = None,
    keep_decisions: bool = False,
) -> StudyReport:
    """Monte-Carlo repetitions of the scenario; deterministic for a fixed seed
    and any worker count (every repetition derives its own substreams)."""
    for m in methods:
        if m not in METHODS:
            raise InvalidDesignError(f"unknown method {m!r}; choose from {METHODS}")
    family = build_contrasts(spec.contrast, k=4)
    start = time.perf_counter()
    workers = default_workers() if workers is None else max(1, workers)
    chunk = 25
    ranges = [range(r0, min(r0 + chunk, spec.reps)) for r0 in range(0, spec.reps, chunk)]
    tasks = [(spec, tuple(methods), r) for r in ranges]

    counts = {m: np.zeros(family.R, dtype=np.int64) for m in methods}
    fwer = {m: 0 for m in methods}
    decisions = {m: np.zeros((spec.reps, family.R), dtype=bool) for m in methods}

    def _absorb(rep_range, part):
        part_counts, part_fwer, part_decisions = part
        for m in methods:
            counts[m] += part_counts[m]
            fwer[m] += part_fwer[m]
            decisions[m][rep_range.start : rep_range.stop] = part_decisions[m]

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for rep_range, part in zip(ranges, pool.map(_run_rep_block, tasks)):
                _absorb(rep_range, part)
    else:
        for rep_range, task in zip(ranges, tasks):
            _absorb(rep_range, _run_rep_block(task))

    return StudyReport(
        spec=spec,
        methods=tuple(methods),
        labels=family.labels,
        rejection_counts=counts,
        fwer_counts=fwer,
        true_null=true_null_mask(spec, family),
        wall_time=time.perf_counter() - start,
        decisions=decisions if keep_decisions else None,
    )


def format_table(report: StudyReport) -> str:
    """Aligned text table: method columns in canonical order, FWER plus one
    row per hypothesis."""
    methods = [m for m in METHODS if m in report.methods]
    header = ["H"] + list(methods)
    rows = [["FWER"] + [f"{report.fwer_percent(m):.2f}" for m in methods]]
    for label in report.labels:
        rows.append([label] + [f"{report.rate_percent(m, label):.2f}" for m in methods])
    widths = [max(len(header[c]), *(len(r[c]) for r in rows)) for c in range(len(header))]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    for r in rows:
        lines.append("  ".join(v.rjust(w) for v, w in zip(r, widths)))
    return "\n".join(lines)
