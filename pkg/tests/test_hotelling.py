import numpy as np
import pytest

from hfanova import (
    Dataset,
    FunctionalSample,
    HypothesisFamily,
    InvalidHypothesisError,
    build_contrasts,
    estimate_moments,
    gph_statistic,
    make_grid,
    pointwise_statistic,
    sigma_hat,
)
from conftest import random_dataset
from oracles import gph_per_block


def hand_case_dataset(m=2):
    grid = make_grid(np.linspace(0.0, 1.0, m))
    g1 = np.tile([0.0], (2, m)) + np.array([[0.0], [2.0]])
    g2 = np.tile([0.0], (2, m)) + np.array([[1.0], [3.0]])
    return Dataset(
        grid=grid,
        samples=(FunctionalSample(1, g1), FunctionalSample(2, g2)),
    )


def scale_dataset(ds, h):
    return Dataset(
        grid=ds.grid,
        samples=tuple(
            FunctionalSample(s.group_id, s.values * h) for s in ds.samples
        ),
    )


class TestPointwiseStatistic:
    def test_hand_case(self):
        ds = hand_case_dataset()
        mom = estimate_moments(ds)
        sig = sigma_hat(ds, mom)
        tf = pointwise_statistic(ds, mom, sig, np.array([1.0, -1.0]), np.array([0.0]), 0)
        assert abs(tf - 0.5) <= 1e-12

    def test_zero_when_target_met(self):
        ds = hand_case_dataset()
        mom = estimate_moments(ds)
        sig = sigma_hat(ds, mom)
        # H eta-hat = -1 at every point; c = -1 makes the form vanish
        tf = pointwise_statistic(ds, mom, sig, np.array([1.0, -1.0]), np.array([-1.0]), 0)
        assert tf == 0.0

    def test_scale_invariance_hand_case(self):
        ds = scale_dataset(hand_case_dataset(), 3.0)
        mom = estimate_moments(ds)
        sig = sigma_hat(ds, mom)
        tf = pointwise_statistic(ds, mom, sig, np.array([1.0, -1.0]), np.array([0.0]), 0)
        assert abs(tf - 0.5) <= 1e-12

    def test_dimension_mismatch(self):
        ds = hand_case_dataset()
        mom = estimate_moments(ds)
        sig = sigma_hat(ds, mom)
        with pytest.raises(InvalidHypothesisError):
            pointwise_statistic(ds, mom, sig, np.array([1.0, -1.0, 0.0]), np.array([0.0]), 0)


class TestGphStatistic:
    def test_constant_tf_integrates_to_itself(self):
        ds = hand_case_dataset(m=5)
        fam = HypothesisFamily(blocks=(np.array([[1.0, -1.0]]),))
        sv = gph_statistic(ds, fam, want_pointwise=True)
        assert np.allclose(sv.pointwise, 0.5, atol=1e-12)
        assert abs(sv.per_block[0] - 0.5) <= 1e-12

    def test_affine_tf_exact(self):
        # data arranged so TF(t) = t on (0, 0.5, 1): integral is exactly 0.5
        grid = make_grid([0.0, 0.5, 1.0])
        tf_target = np.array([0.0, 0.5, 1.0])
        spread = np.sqrt(tf_target * 2.0)  # TF = n*d^2/8 with d = 2*spread, n = 4
        g1 = np.vstack([-1.0 + 0 * spread, 1.0 + 0 * spread])
        g2 = np.vstack([-1.0 - spread, 1.0 - spread])
        ds = Dataset(
            grid=grid,
            samples=(FunctionalSample(1, g1), FunctionalSample(2, g2)),
        )
        fam = HypothesisFamily(blocks=(np.array([[1.0, -1.0]]),))
        sv = gph_statistic(ds, fam, want_pointwise=True)
        assert np.allclose(sv.pointwise[0], tf_target, atol=1e-12)
        assert abs(sv.per_block[0] - 0.5) <= 1e-12

    def test_null_data_gives_zero(self):
        rng = np.random.default_rng(0)
        vals = rng.normal(size=(3, 4))
        ds = Dataset(
            grid=make_grid(np.linspace(0, 1, 4)),
            samples=tuple(FunctionalSample(i + 1, vals) for i in range(3)),
        )
        for kind in ("dunnett", "tukey", "centering"):
            sv = gph_statistic(ds, build_contrasts(kind, k=3))
            assert np.allclose(sv.per_block, 0.0, atol=1e-20)

    def test_per_block_matches_weighted_pointwise(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            ds = random_dataset(rng)
            fam = build_contrasts("tukey", k=ds.k)
            sv = gph_statistic(ds, fam, want_pointwise=True)
            integ = sv.pointwise @ ds.grid.weights
            assert np.allclose(sv.per_block, integ, rtol=1e-10, atol=1e-12)

    def test_per_block_matches_pointwise_op(self):
        rng = np.random.default_rng(2)
        ds = random_dataset(rng, k=3, m=4)
        mom = estimate_moments(ds)
        sig = sigma_hat(ds, mom)
        fam = build_contrasts("centering", k=3)
        sv = gph_statistic(ds, fam, want_pointwise=True)
        for j in range(4):
            tf = pointwise_statistic(ds, mom, sig, fam.blocks[0], np.zeros(3), j)
            assert abs(tf - sv.pointwise[0, j]) <= 1e-10 * (1 + tf)

    def test_nonnegative(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            ds = random_dataset(rng)
            fam = build_contrasts("dunnett", k=ds.k)
            assert np.all(gph_statistic(ds, fam).per_block >= 0.0)


class TestInvariances:
    def test_orthogonal_block_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            ds = random_dataset(rng)
            fam = build_contrasts("centering", k=ds.k)
            base = gph_statistic(ds, fam).per_block
            q, _ = np.linalg.qr(rng.normal(size=(ds.k, ds.k)))
            rotated = HypothesisFamily(blocks=(q @ fam.blocks[0],))
            rot = gph_statistic(ds, rotated).per_block
            assert np.allclose(rot, base, rtol=1e-8, atol=1e-10)

    def test_scale_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            ds = random_dataset(rng)
            h = rng.uniform(0.5, 2.0, size=ds.grid.m) * np.where(
                rng.random(ds.grid.m) < 0.3, -1.0, 1.0
            )
            fam = build_contrasts("tukey", k=ds.k)
            base = gph_statistic(ds, fam).per_block
            scaled = gph_statistic(scale_dataset(ds, h), fam).per_block
            assert np.allclose(scaled, base, rtol=1e-8, atol=1e-10)

    def test_monotone_in_displacement(self):
        # from a null-satisfying start, shifting means along H' u only grows the form
        rng = np.random.default_rng(6)
        for _ in range(10):
            k, m = 3, 4
            vals = rng.normal(size=(4, m))
            base_samples = [vals.copy() for _ in range(k)]
            fam = build_contrasts("centering", k=k)
            h = fam.blocks[0]
            u = rng.normal(size=k)
            shift = h.T @ u  # per-group displacement direction
            prev = -1.0
            for delta in (0.0, 0.3, 0.6, 1.2):
                samples = tuple(
                    FunctionalSample(i + 1, base_samples[i] + delta * shift[i])
                    for i in range(k)
                )
                ds = Dataset(grid=make_grid(np.linspace(0, 1, m)), samples=samples)
                stat = gph_statistic(ds, fam).per_block[0]
                assert stat >= prev - 1e-10
                prev = stat


class TestBruteForceOracle:
    def test_matches_explicit_loops(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            ds = random_dataset(rng, k=int(rng.integers(2, 4)), m=int(rng.integers(3, 5)))
            fam = build_contrasts("tukey", k=ds.k)
            ours = gph_statistic(ds, fam).per_block
            ref = gph_per_block(
                ds.grid.points, [s.values for s in ds.samples],
                [b for b in fam.blocks],
            )
            assert np.allclose(ours, ref, rtol=1e-10, atol=1e-10)

    def test_matches_with_nonzero_target(self):
        rng = np.random.default_rng(8)
        ds = random_dataset(rng, k=3, m=4)
        c = rng.normal(size=(3, 4))
        fam = build_contrasts("centering", k=3).with_c(c)
        ours = gph_statistic(ds, fam).per_block
        ref = gph_per_block(
            ds.grid.points, [s.values for s in ds.samples], [fam.blocks[0]], c_rows=c
        )
        assert np.allclose(ours, ref, rtol=1e-10, atol=1e-10)
