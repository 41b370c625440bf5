import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from perceptual_fairness import divergences as dv
from perceptual_fairness.distributions import (
    DiscretePmf,
    Density1D,
    kde_fit,
    make_rng,
    normal_density,
    truncated_normal_density,
)

pmf_pairs = st.integers(1, 8).flatmap(
    lambda n: st.tuples(
        *[st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n).filter(lambda v: sum(v) > 0) for _ in range(3)]
    )
)


def _norm(v):
    a = np.asarray(v, dtype=np.float64)
    a = a / a.sum()
    a[-1] = 0.0
    a[-1] = max(0.0, 1.0 - a.sum())
    return a / math.fsum(a)


class TestTvDiscrete:
    def test_hand_cases(self):
        assert dv.tv_discrete([1, 0], [0, 1]) == 1.0
        assert dv.tv_discrete([0.5, 0.5], [0.5, 0.5]) == 0.0
        assert dv.tv_discrete([0.2, 0.3, 0.5], [0.5, 0.3, 0.2]) == pytest.approx(0.3, abs=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            dv.tv_discrete([1.0], [0.5, 0.5])

    @settings(max_examples=200, deadline=None)
    @given(pmf_pairs)
    def test_metric_properties(self, triple):
        try:
            p, q, r = (DiscretePmf(_norm(v)) for v in triple)
        except ValueError:
            return
        pq = dv.tv_discrete(p, q)
        assert 0.0 <= pq <= 1.0
        assert pq == dv.tv_discrete(q, p)
        assert dv.tv_discrete(p, p) == 0.0
        assert pq <= dv.tv_discrete(p, r) + dv.tv_discrete(r, q) + 1e-15


class TestTvContinuous:
    def test_shifted_normals(self):
        # TV(N(0,1), N(1,1)) = 2 Phi(1/2) - 1
        exact = 2 * stats.norm.cdf(0.5) - 1
        tv = dv.tv_continuous_1d(normal_density(0, 1), normal_density(1, 1))
        assert tv == pytest.approx(exact, abs=1e-6)

    def test_disjoint_truncated_halves(self):
        spec = dv.QuadratureSpec(breakpoints=(1.0,))
        tv = dv.tv_continuous_1d(
            truncated_normal_density("below_cut", 1.0), truncated_normal_density("above_cut", 1.0), spec
        )
        assert tv == pytest.approx(1.0, abs=1e-9)

    def test_identical_is_zero(self):
        d = normal_density(0.3, 2.0)
        assert dv.tv_continuous_1d(d, d) == 0.0

    def test_error_estimate_reported(self):
        tv, err = dv.tv_continuous_1d(normal_density(), normal_density(0.5, 1.5), full_output=True)
        assert 0 <= err < 1e-5

    def test_quadrature_error_raised(self):
        spiky = Density1D(lambda x: np.where(np.abs(x) < 1e-3, 500.0, 0.0), (-1.0, 1.0))
        with pytest.raises(dv.QuadratureError):
            dv.tv_continuous_1d(spiky, normal_density(), dv.QuadratureSpec(points=64))

    def test_wide_interval_is_clipped(self):
        a, b = normal_density(0, 1), normal_density(1, 1)
        exact = 2 * stats.norm.cdf(0.5) - 1
        assert dv.tv_continuous_1d(a, b, dv.QuadratureSpec(-1000.0, 1000.0)) == pytest.approx(exact, abs=2e-6)

    def test_kde_converges_to_truth(self):
        truth = normal_density()
        errs = []
        for n in (500, 5000, 50000):
            x = make_rng(n).normal(size=n)
            errs.append(dv.tv_continuous_1d(truth, kde_fit(x)))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 0.02

    @pytest.mark.parametrize(
        "kwargs",
        [dict(lo=1.0, hi=0.0), dict(points=3), dict(breakpoints=(20.0,)), dict(tolerance=0.0)],
    )
    def test_spec_validation(self, kwargs):
        with pytest.raises(ValueError):
            dv.QuadratureSpec(**kwargs)

    def test_segments(self):
        spec = dv.QuadratureSpec(-2, 2, breakpoints=(1.0, -1.0))
        assert spec.segments() == [(-2, -1.0), (-1.0, 1.0), (1.0, 2)]
        assert spec.segments(0.0, 5.0) == [(0.0, 1.0), (1.0, 2)]
        assert spec.segments(3.0, 4.0) == []


class TestWasserstein:
    def test_hand_cases(self):
        assert dv.wasserstein1_empirical([0.0], [2.5]) == 2.5
        assert dv.wasserstein1_empirical([0, 1, 2], [2, 1, 0]) == 0.0
        assert dv.wasserstein1_empirical([0.0, 1.0], [0.0, 0.0, 0.0, 4.0]) == 1.0

    def test_matches_scipy(self):
        rng = make_rng(1)
        for n, m in ((100, 100), (37, 91)):
            x, y = rng.normal(size=n), rng.exponential(size=m)
            assert dv.wasserstein1_empirical(x, y) == pytest.approx(stats.wasserstein_distance(x, y), rel=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.floats(-100, 100), min_size=1, max_size=30),
        st.lists(st.floats(-100, 100), min_size=1, max_size=30),
        st.floats(-50, 50),
    )
    def test_properties(self, x, y, shift):
        w = dv.wasserstein1_empirical(x, y)
        assert w >= 0
        assert w == pytest.approx(dv.wasserstein1_empirical(y, x), rel=1e-9, abs=1e-9)
        shifted = dv.wasserstein1_empirical(np.add(x, shift), x)
        assert shifted == pytest.approx(abs(shift), rel=1e-9, abs=1e-9)


def _brute_mmd(a, b, unbiased):
    d = a.shape[1]
    n, m = len(a), len(b)

    def k(x, y):
        return (float(np.dot(x, y)) / d + 1.0) ** 3

    if unbiased:
        kaa = sum(k(a[i], a[j]) for i in range(n) for j in range(n) if i != j) / (n * (n - 1))
        kbb = sum(k(b[i], b[j]) for i in range(m) for j in range(m) if i != j) / (m * (m - 1))
    else:
        kaa = sum(k(x, y) for x in a for y in a) / n**2
        kbb = sum(k(x, y) for x in b for y in b) / m**2
    return kaa + kbb - 2 * sum(k(x, y) for x in a for y in b) / (n * m)


class TestKid:
    def test_polynomial_kernel(self):
        assert dv.polynomial_kernel([1.0, 1.0], [1.0, 1.0]) == 8.0
        assert dv.polynomial_kernel([0.0], [5.0]) == 1.0

    @pytest.mark.parametrize("unbiased", [True, False])
    def test_matches_brute_force(self, unbiased):
        rng = make_rng(2)
        a, b = rng.normal(size=(30, 3)), rng.normal(1.0, 1.0, size=(25, 3))
        assert dv.kid(a, b, unbiased=unbiased) == pytest.approx(_brute_mmd(a, b, unbiased), abs=1e-10)

    def test_can_be_negative(self):
        rng = make_rng(3)
        x = rng.normal(size=(20, 2))
        values = [dv.kid(x[:10], x[10:]), dv.kid(x[::2], x[1::2])]
        assert min(values) < 0

    def test_biased_identical_sets_is_zero(self):
        x = make_rng(4).normal(size=(15, 4))
        assert dv.kid(x, x, unbiased=False) == pytest.approx(0.0, abs=1e-12)

    def test_permutation_invariance_is_exact(self):
        rng = make_rng(5)
        a, b = rng.normal(size=(600, 3)), rng.normal(size=(700, 3))
        assert dv.kid(a, b) == dv.kid(a[rng.permutation(600)], b[rng.permutation(700)])

    def test_subsets_are_seeded(self):
        rng = make_rng(6)
        a, b = rng.normal(size=(100, 2)), rng.normal(0.5, 1, size=(120, 2))
        one = dv.kid(a, b, subset_size=50, n_subsets=5, seed=1)
        assert one == dv.kid(a, b, subset_size=50, n_subsets=5, seed=1)
        assert one != dv.kid(a, b, subset_size=50, n_subsets=5, seed=2)
        # a subset as large as both sets is the full estimator
        full = dv.kid(a, b[:100], subset_size=100, n_subsets=1)
        assert full == pytest.approx(dv.kid(a, b[:100]), rel=1e-12)

    def test_validation(self):
        x = np.zeros((5, 2))
        with pytest.raises(ValueError):
            dv.kid(x, np.zeros((5, 3)))
        with pytest.raises(ValueError):
            dv.kid(x, x, subset_size=3)
        with pytest.raises(ValueError):
            dv.kid(x, x, subset_size=6, n_subsets=1)
        with pytest.raises(ValueError):
            dv.kid(x[:1], x)


class TestFid:
    def test_scalar_formula(self):
        rng = make_rng(7)
        x, y = rng.normal(size=50), rng.normal(3, 2, size=80)
        s1, s2 = np.std(x, ddof=1), np.std(y, ddof=1)
        expected = (x.mean() - y.mean()) ** 2 + (s1 - s2) ** 2
        got = dv.frechet_distance(dv.fit_gaussian_moments(x), dv.fit_gaussian_moments(y))
        assert got == pytest.approx(expected, abs=1e-12)

    def test_commuting_covariances(self):
        # diagonal covariances: sum of per-axis scalar distances
        p = dv.GaussianMoments([0.0, 1.0], np.diag([4.0, 1.0]))
        q = dv.GaussianMoments([1.0, 1.0], np.diag([1.0, 9.0]))
        assert dv.frechet_distance(p, q) == pytest.approx(1.0 + (2 - 1) ** 2 + (1 - 3) ** 2, abs=1e-12)

    def test_matches_scipy_sqrtm(self):
        from scipy import linalg

        rng = make_rng(8)
        a, b = rng.normal(size=(200, 4)), rng.normal(size=(200, 4)) @ rng.normal(size=(4, 4))
        p, q = dv.fit_gaussian_moments(a), dv.fit_gaussian_moments(b)
        cross = linalg.sqrtm(p.covariance @ q.covariance).real
        expected = np.sum((p.mean - q.mean) ** 2) + np.trace(p.covariance + q.covariance - 2 * cross)
        assert dv.frechet_distance(p, q) == pytest.approx(expected, rel=1e-8)

    def test_identical_is_zero_and_rank_deficient_ok(self):
        a = make_rng(9).normal(size=(3, 10))  # rank-deficient covariance
        m = dv.fit_gaussian_moments(a)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert dv.frechet_distance(m, m) == pytest.approx(0.0, abs=1e-10)

    def test_symmetric(self):
        rng = make_rng(10)
        p = dv.fit_gaussian_moments(rng.normal(size=(40, 3)))
        q = dv.fit_gaussian_moments(rng.normal(2, 1, size=(60, 3)))
        assert dv.frechet_distance(p, q) == pytest.approx(dv.frechet_distance(q, p), rel=1e-10)

    def test_permutation_invariance_is_exact(self):
        rng = make_rng(11)
        a = rng.normal(size=(300, 3))
        b = rng.normal(size=(300, 3))
        m1 = dv.frechet_distance(dv.fit_gaussian_moments(a), dv.fit_gaussian_moments(b))
        m2 = dv.frechet_distance(
            dv.fit_gaussian_moments(a[rng.permutation(300)]), dv.fit_gaussian_moments(b[::-1])
        )
        assert m1 == m2

    def test_moments_validation(self):
        with pytest.raises(ValueError):
            dv.GaussianMoments([0.0], [[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ValueError):
            dv.GaussianMoments([0.0, 0.0], [[1.0, 0.5], [0.0, 1.0]])
        with pytest.raises(ValueError):
            dv.GaussianMoments([0.0, 0.0], [[1.0, 0.0], [0.0, -1.0]])
        with pytest.raises(ValueError):
            dv.fit_gaussian_moments(np.zeros((1, 2)))
