import numpy as np
import pytest
from scipy import stats as scipy_stats

from hfanova import (
    BootstrapConfig,
    Dataset,
    FunctionalSample,
    GroupMoments,
    HypothesisFamily,
    InvalidHypothesisError,
    NumericError,
    SeedSpec,
    bootstrap_matrix,
    build_contrasts,
    draw_bootstrap_dataset,
    estimate_moments,
    global_test,
    gph_statistic,
    make_grid,
    mct_test,
)
from conftest import random_dataset


def constant_dataset(value=1.0, k=2, n=3, m=4):
    vals = np.full((n, m), value)
    return Dataset(
        grid=make_grid(np.linspace(0, 1, m)),
        samples=tuple(FunctionalSample(i + 1, vals) for i in range(k)),
    )


class TestConfig:
    def test_validation(self):
        with pytest.raises(NumericError):
            BootstrapConfig(B=0, alpha=0.05, seed=SeedSpec(0))
        with pytest.raises(NumericError):
            BootstrapConfig(B=10, alpha=1.0, seed=SeedSpec(0))

    def test_worker_count_env_var(self, monkeypatch):
        from hfanova.bootstrap import default_workers

        monkeypatch.setenv("HFANOVA_WORKERS", "3")
        assert default_workers() == 3
        monkeypatch.setenv("HFANOVA_WORKERS", "junk")
        assert default_workers() == 1
        monkeypatch.delenv("HFANOVA_WORKERS")
        assert default_workers() == 1


class TestDrawBootstrapDataset:
    def test_degenerate_covariance_yields_zero_curves(self):
        ds = constant_dataset()
        mom = estimate_moments(ds, full_cov=True)
        rep = draw_bootstrap_dataset(ds, mom, SeedSpec(1), 0)
        for s in rep.samples:
            assert np.array_equal(s.values, np.zeros_like(s.values))

    def test_deterministic_per_replicate(self):
        rng = np.random.default_rng(0)
        ds = random_dataset(rng, k=2, m=4)
        mom = estimate_moments(ds, full_cov=True)
        a = draw_bootstrap_dataset(ds, mom, SeedSpec(5), 3)
        b = draw_bootstrap_dataset(ds, mom, SeedSpec(5), 3)
        for sa, sb in zip(a.samples, b.samples):
            assert np.array_equal(sa.values, sb.values)
        c = draw_bootstrap_dataset(ds, mom, SeedSpec(5), 4)
        assert not np.array_equal(a.samples[0].values, c.samples[0].values)

    def test_identity_covariance_mc_mean(self):
        # 10^4 replicate curves with identity covariance: pointwise mean near 0
        m = 6
        ds = constant_dataset(m=m, n=2)
        mom = GroupMoments(
            means=np.zeros((2, m)),
            cov_diag=np.ones((2, m)),
            cov_full=(np.eye(m), np.eye(m)),
        )
        seed = SeedSpec(7)
        total = np.zeros(m)
        count = 0
        for b in range(2500):
            rep = draw_bootstrap_dataset(ds, mom, seed, b)
            for s in rep.samples:
                total += s.values.sum(axis=0)
                count += s.values.shape[0]
        mean = total / count
        se = 1.0 / np.sqrt(count)
        assert np.all(np.abs(mean) <= 4 * se)

    def test_requires_full_covariance(self):
        rng = np.random.default_rng(1)
        ds = random_dataset(rng, k=2, m=3)
        with pytest.raises(NumericError):
            draw_bootstrap_dataset(ds, estimate_moments(ds), SeedSpec(0), 0)


class TestBootstrapMatrix:
    def test_degenerate_single_row_of_zeros(self):
        ds = constant_dataset()
        fam = build_contrasts("dunnett", k=2)
        cfg = BootstrapConfig(B=1, alpha=0.05, seed=SeedSpec(0))
        mat = bootstrap_matrix(ds, fam, cfg)
        assert mat.stats.shape == (1, 1)
        assert np.array_equal(mat.stats, np.zeros((1, 1)))

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        ds = random_dataset(rng, k=3, m=5)
        fam = build_contrasts("tukey", k=3)
        cfg = BootstrapConfig(B=25, alpha=0.05, seed=SeedSpec(9))
        a = bootstrap_matrix(ds, fam, cfg)
        b = bootstrap_matrix(ds, fam, cfg)
        assert np.array_equal(a.stats, b.stats)

    def test_worker_count_does_not_change_result(self):
        rng = np.random.default_rng(3)
        ds = random_dataset(rng, k=2, m=4)
        fam = build_contrasts("dunnett", k=2)
        seq = bootstrap_matrix(
            ds, fam, BootstrapConfig(B=150, alpha=0.05, seed=SeedSpec(4), workers=1)
        )
        par = bootstrap_matrix(
            ds, fam, BootstrapConfig(B=150, alpha=0.05, seed=SeedSpec(4), workers=2)
        )
        assert np.array_equal(seq.stats, par.stats)

    def test_row_coupling_by_recomputation(self):
        rng = np.random.default_rng(4)
        ds = random_dataset(rng, k=3, m=4)
        mom = estimate_moments(ds, full_cov=True)
        fam = build_contrasts("tukey", k=3)
        cfg = BootstrapConfig(B=8, alpha=0.05, seed=SeedSpec(11))
        mat = bootstrap_matrix(ds, fam, cfg, moments=mom)
        for b in (0, 3, 7):
            rep = draw_bootstrap_dataset(ds, mom, cfg.seed, b)
            row = gph_statistic(rep, fam).per_block
            assert np.array_equal(mat.stats[b], row)

    def test_columns_permute_with_blocks(self):
        rng = np.random.default_rng(5)
        ds = random_dataset(rng, k=3, m=4)
        fam = build_contrasts("tukey", k=3)
        perm = [2, 0, 1]
        shuffled = HypothesisFamily(
            blocks=tuple(fam.blocks[p] for p in perm),
            labels=tuple(fam.labels[p] for p in perm),
        )
        cfg = BootstrapConfig(B=12, alpha=0.05, seed=SeedSpec(6))
        base = bootstrap_matrix(ds, fam, cfg)
        moved = bootstrap_matrix(ds, shuffled, cfg)
        assert np.array_equal(moved.stats, base.stats[:, perm])

    def test_entries_nonnegative(self):
        rng = np.random.default_rng(6)
        ds = random_dataset(rng)
        fam = build_contrasts("dunnett", k=ds.k)
        mat = bootstrap_matrix(ds, fam, BootstrapConfig(B=20, alpha=0.1, seed=SeedSpec(2)))
        assert np.all(mat.stats >= 0.0)

    def test_distribution_matches_sampled_limit(self):
        # two-sample KS between engine replicates and the limit law sampled
        # directly from the plugged-in covariance with an independent path
        rng = np.random.default_rng(7)
        m = 12
        grid = make_grid(np.linspace(0, 1, m))
        sizes = (40, 40)
        cov_scale = [1.0, 2.0]
        samples = []
        for i, (ni, cs) in enumerate(zip(sizes, cov_scale), start=1):
            z = rng.normal(size=(ni, m))
            smooth = z @ np.linalg.cholesky(
                cs * np.exp(-np.abs(np.subtract.outer(grid.points, grid.points)) / 0.4)
            ).T
            samples.append(FunctionalSample(i, smooth))
        ds = Dataset(grid=grid, samples=tuple(samples))
        fam = HypothesisFamily(blocks=(np.array([[1.0, -1.0]]),))
        cfg = BootstrapConfig(B=2000, alpha=0.05, seed=SeedSpec(13))
        mat = bootstrap_matrix(ds, fam, cfg)

        mom = estimate_moments(ds, full_cov=True)
        n = ds.n
        kern = sum(
            (n / sizes[i]) * mom.cov_full[i] for i in range(2)
        )  # H Sigma-hat H' for H = [1, -1]
        oracle_rng = np.random.default_rng(99)
        z = oracle_rng.multivariate_normal(
            np.zeros(m), kern, size=2000, method="svd"
        )
        diag = np.diag(kern)
        inv_diag = np.where(diag > 0, 1.0 / np.where(diag > 0, diag, 1.0), 0.0)
        oracle = (z**2 * inv_diag) @ grid.weights
        ks = scipy_stats.ks_2samp(mat.stats[:, 0], oracle)
        assert ks.pvalue > 0.01


class TestGlobalTest:
    def test_exact_null_data_never_rejects(self):
        rng = np.random.default_rng(8)
        vals = rng.normal(size=(4, 5))
        ds = Dataset(
            grid=make_grid(np.linspace(0, 1, 5)),
            samples=tuple(FunctionalSample(i + 1, vals) for i in range(2)),
        )
        fam = build_contrasts("centering", k=2)
        res = global_test(ds, fam, BootstrapConfig(B=50, alpha=0.05, seed=SeedSpec(3)))
        assert res.statistic == 0.0
        assert not res.reject

    def test_observed_above_all_replicates(self):
        rng = np.random.default_rng(9)
        ds = random_dataset(rng, k=2, m=4, sizes=[6, 6], shift=25.0)
        fam = build_contrasts("centering", k=2)
        res = global_test(ds, fam, BootstrapConfig(B=40, alpha=0.05, seed=SeedSpec(4)))
        assert res.reject
        assert res.p_value <= 1.0 / 40

    def test_requires_single_block(self):
        rng = np.random.default_rng(10)
        ds = random_dataset(rng, k=3, m=4)
        with pytest.raises(InvalidHypothesisError):
            global_test(ds, build_contrasts("dunnett", k=3),
                        BootstrapConfig(B=5, alpha=0.05, seed=SeedSpec(0)))

    def test_p_value_on_grid(self):
        rng = np.random.default_rng(11)
        ds = random_dataset(rng, k=2, m=4)
        fam = build_contrasts("centering", k=2)
        B = 17
        res = global_test(ds, fam, BootstrapConfig(B=B, alpha=0.1, seed=SeedSpec(5)))
        assert abs(res.p_value * B - round(res.p_value * B)) < 1e-9

    def test_null_calibration_rate(self, global_test_null_rate):
        assert 0.02 <= global_test_null_rate <= 0.08

    def test_scaled_data_same_decision(self):
        rng = np.random.default_rng(12)
        ds = random_dataset(rng, k=2, m=6, sizes=[8, 8], shift=0.8)
        h = rng.uniform(0.5, 2.0, size=6)
        scaled = Dataset(
            grid=ds.grid,
            samples=tuple(
                FunctionalSample(s.group_id, s.values * h) for s in ds.samples
            ),
        )
        cfg = BootstrapConfig(B=60, alpha=0.05, seed=SeedSpec(17))
        fam = build_contrasts("centering", k=2)
        a = global_test(ds, fam, cfg)
        b = global_test(scaled, fam, cfg)
        assert a.reject == b.reject
        assert abs(a.p_value - b.p_value) < 1e-12
        res_a = mct_test(ds, build_contrasts("dunnett", k=2), cfg)
        res_b = mct_test(scaled, build_contrasts("dunnett", k=2), cfg)
        assert np.array_equal(res_a.local_reject, res_b.local_reject)
        assert res_a.beta_tilde == res_b.beta_tilde
