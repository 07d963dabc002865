"""Heteroscedastic functional ANOVA: integrated Hotelling-type statistics,
parametric-bootstrap calibration, coherent multiple contrast tests, comparison
procedures, and a Monte-Carlo study harness."""

from .bootstrap import (
    BootstrapConfig,
    BootstrapMatrix,
    GlobalTestResult,
    bootstrap_matrix,
    draw_bootstrap_dataset,
    global_test,
)
from .competitors import CompetitorResult, fmax_gpf, l2b_fb, ssh_pointwise
from .core import (
    Dataset,
    FunctionalSample,
    Grid,
    HypothesisFamily,
    build_contrasts,
    make_grid,
)
from .errors import (
    HfanovaError,
    IngestionError,
    InsufficientSampleError,
    InvalidDesignError,
    InvalidGridError,
    InvalidHypothesisError,
    NotPositiveSemidefiniteError,
    NumericError,
)
from .estimate import GroupMoments, SigmaHat, estimate_moments, group_cov, group_mean, sigma_hat
from .hotelling import StatisticVector, gph_statistic, pointwise_statistic
from .io import export_csv, ingest_csv
from .mct import (
    MctResult,
    adjusted_pvalues,
    beta_tilde,
    confidence_region_contains,
    fwer_at,
    mct_test,
)
from .numerics import SeedSpec, empirical_quantile, gaussian_vector, pinv, psd_factor
from .simulate import ScenarioSpec, StudyReport, generate_curves, run_study

__version__ = "0.1.0"

__all__ = [
    "BootstrapConfig",
    "BootstrapMatrix",
    "CompetitorResult",
    "Dataset",
    "FunctionalSample",
    "GlobalTestResult",
    "Grid",
    "GroupMoments",
    "HfanovaError",
    "HypothesisFamily",
    "IngestionError",
    "InsufficientSampleError",
    "InvalidDesignError",
    "InvalidGridError",
    "InvalidHypothesisError",
    "MctResult",
    "NotPositiveSemidefiniteError",
    "NumericError",
    "ScenarioSpec",
    "SeedSpec",
    "SigmaHat",
    "StatisticVector",
    "StudyReport",
    "adjusted_pvalues",
    "beta_tilde",
    "bootstrap_matrix",
    "build_contrasts",
    "confidence_region_contains",
    "draw_bootstrap_dataset",
    "empirical_quantile",
    "estimate_moments",
    "export_csv",
    "fmax_gpf",
    "fwer_at",
    "gaussian_vector",
    "generate_curves",
    "global_test",
    "gph_statistic",
    "group_cov",
    "group_mean",
    "ingest_csv",
    "l2b_fb",
    "make_grid",
    "mct_test",
    "pinv",
    "pointwise_statistic",
    "psd_factor",
    "run_study",
    "sigma_hat",
    "ssh_pointwise",
]
