import numpy as np
import pytest

from hfanova import (
    BootstrapConfig,
    Dataset,
    FunctionalSample,
    SeedSpec,
    build_contrasts,
    global_test,
    make_grid,
)
from hfanova.simulate import ScenarioSpec, run_study

WORKERS = 2

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_dataset(rng, k=None, m=None, sizes=None, shift=0.0):
    k = k if k is not None else int(rng.integers(2, 4))
    m = m if m is not None else int(rng.integers(3, 6))
    sizes = sizes if sizes is not None else [int(rng.integers(3, 7)) for _ in range(k)]
    points = np.sort(rng.uniform(0.0, 1.0, size=m))
    points[0], points[-1] = 0.0, 1.0
    while np.any(np.diff(points) <= 1e-3):
        points = np.sort(rng.uniform(0.0, 1.0, size=m))
        points[0], points[-1] = 0.0, 1.0
    samples = tuple(
        FunctionalSample(i + 1, rng.normal(size=(sizes[i], m)) + shift * i)
        for i in range(k)
    )
    return Dataset(grid=make_grid(points), samples=samples)


@pytest.fixture(scope="session")
def study_null_homoscedastic():
    """Criterion 5 scenario; decisions kept for the criterion 8 comparison."""
    spec = ScenarioSpec(
        distribution="normal", size_factor=1, lambdas="homoscedastic",
        scaling="none", contrast="dunnett", alternative="null",
        reps=500, B=500, alpha=0.05, seed=SeedSpec(0),
    )
    return run_study(spec, methods=("mGPH", "GPH"), workers=WORKERS,
                     keep_decisions=True)


@pytest.fixture(scope="session")
def study_null_homoscedastic_scaled():
    spec = ScenarioSpec(
        distribution="normal", size_factor=1, lambdas="homoscedastic",
        scaling="inverse_shift", contrast="dunnett", alternative="null",
        reps=500, B=500, alpha=0.05, seed=SeedSpec(0),
    )
    return run_study(spec, methods=("mGPH",), workers=WORKERS, keep_decisions=True)


@pytest.fixture(scope="session")
def study_null_negative_pairing():
    spec = ScenarioSpec(
        distribution="normal", size_factor=1, lambdas="negative_pairing",
        scaling="none", contrast="dunnett", alternative="null",
        reps=500, B=500, alpha=0.05, seed=SeedSpec(0),
    )
    return run_study(spec, methods=("mGPH", "Fmax"), workers=WORKERS)


@pytest.fixture(scope="session")
def study_power_a2():
    spec = ScenarioSpec(
        distribution="normal", size_factor=1, lambdas="homoscedastic",
        scaling="none", contrast="dunnett", alternative="A2",
        reps=500, B=500, alpha=0.05, seed=SeedSpec(0),
    )
    return run_study(spec, methods=("mGPH",), workers=WORKERS)


@pytest.fixture(scope="session")
def study_a1_scaled_l2b():
    spec = ScenarioSpec(
        distribution="normal", size_factor=1, lambdas="homoscedastic",
        scaling="inverse_shift", contrast="dunnett", alternative="A1",
        reps=500, B=500, alpha=0.05, seed=SeedSpec(0),
    )
    return run_study(spec, methods=("L2b",), workers=WORKERS)


@pytest.fixture(scope="session")
def global_test_null_rate():
    """Rejection rate of the global test on null one-way Gaussian data
    (k=4, sizes 15/20/25/30, homoscedastic, centering contrast, 500 trials)."""
    from hfanova.simulate import generate_curves

    family = build_contrasts("centering", k=4)
    trials = 500
    gen_spec = ScenarioSpec(
        distribution="normal", lambdas="homoscedastic", scaling="none",
        contrast="dunnett", alternative="null", reps=trials, B=1, seed=SeedSpec(3),
    )
    rejections = 0
    for rep in range(trials):
        data = generate_curves(gen_spec, rep)
        config = BootstrapConfig(B=300, alpha=0.05, seed=gen_spec.seed.child(7, rep))
        rejections += global_test(data, family, config).reject
    return rejections / trials
