import numpy as np
import pytest

from ftsproj import DomainError, band_width, coverage, mape, mse, winkler


class TestMse:
    def test_exact_match(self):
        x = np.arange(5.0)
        assert mse(x, x) == 0.0

    def test_constant_error(self):
        truth = np.arange(6.0)
        assert mse(truth + 3.0, truth) == pytest.approx(9.0)

    def test_matches_direct_sum(self):
        rng = np.random.default_rng(0)
        p, t = rng.normal(size=(2, 40))
        direct = sum((a - b) ** 2 for a, b in zip(p, t)) / 40
        assert mse(p, t) == pytest.approx(direct, rel=1e-14)

    def test_alignment_required(self):
        with pytest.raises(DomainError):
            mse(np.zeros(3), np.zeros(4))


class TestMape:
    def test_exact_match(self):
        t = np.linspace(1, 2, 7)
        assert mape(t, t) == 0.0

    def test_ten_percent(self):
        t = np.linspace(1, 2, 7)
        assert mape(1.1 * t, t) == pytest.approx(10.0)

    def test_matches_direct_sum(self):
        rng = np.random.default_rng(1)
        t = rng.uniform(0.5, 2.0, size=30)
        p = t + rng.normal(size=30) * 0.1
        direct = 100 * np.mean(np.abs((t - p) / t))
        assert mape(p, t) == pytest.approx(direct, rel=1e-14)

    def test_zero_truth_rejected(self):
        t = np.array([1.0, 0.0, 2.0])
        with pytest.raises(DomainError):
            mape(t, t)


class TestCoverage:
    def test_inside_everywhere(self):
        t = np.linspace(0, 1, 9)
        assert coverage(t - 1, t + 1, t) == 1.0

    def test_above_everywhere(self):
        t = np.linspace(0, 1, 9)
        assert coverage(t - 2, t - 1, t) == 0.0

    def test_half_inside(self):
        truth = np.concatenate([np.zeros(5), np.full(5, 9.0)])
        assert coverage(np.full(10, -1.0), np.full(10, 1.0), truth) == 0.5

    def test_boundary_counts_inside(self):
        x = np.ones(4)
        assert coverage(x, x, x) == 1.0


class TestWinkler:
    def test_covered_equals_width(self):
        truth = np.linspace(0, 1, 11)
        assert winkler(truth - 0.5, truth + 1.5, truth, 0.1) == pytest.approx(2.0)

    def test_single_point_penalty(self):
        # above the band by 0.2 at alpha = 0.2: 1 + (2/0.2)*0.2 = 3
        got = winkler(np.array([0.0]), np.array([1.0]), np.array([1.2]), 0.2)
        assert got == pytest.approx(3.0)

    def test_at_least_width_equality_iff_covered(self):
        rng = np.random.default_rng(2)
        for _ in range(40):
            lower = rng.normal(size=12)
            upper = lower + rng.uniform(0.1, 1.0, size=12)
            truth = rng.normal(size=12)
            w = winkler(lower, upper, truth, 0.1)
            width = band_width(lower, upper)
            assert w >= width - 1e-12
            covered = coverage(lower, upper, truth) == 1.0
            assert (w == pytest.approx(width, abs=1e-12)) == covered

    def test_monotone_in_coverage_for_fixed_width(self):
        lower = np.zeros(10)
        upper = np.ones(10)
        close = np.full(10, 1.1)
        far = np.full(10, 2.0)
        a = 0.1
        inside = winkler(lower, upper, np.full(10, 0.5), a)
        assert inside < winkler(lower, upper, close, a) < winkler(lower, upper, far, a)

    def test_alpha_validation(self):
        x = np.zeros(3)
        for alpha in (0.0, 1.0, -0.2, 2.0):
            with pytest.raises(DomainError):
                winkler(x, x, x, alpha)

    def test_grid_reindexing_invariance(self):
        rng = np.random.default_rng(3)
        lower = rng.normal(size=8)
        upper = lower + 1
        truth = rng.normal(size=8)
        perm = rng.permutation(8)
        assert winkler(lower, upper, truth, 0.2) == pytest.approx(
            winkler(lower[perm], upper[perm], truth[perm], 0.2)
        )
        assert mse(lower, truth) == pytest.approx(mse(lower[perm], truth[perm]))
