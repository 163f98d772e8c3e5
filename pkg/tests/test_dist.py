import math

import numpy as np
import pytest
from scipy import integrate, stats

from hamselect import dist
from hamselect.dist import ALT, NULL, DomainError

SPECS = [
    dist.gaussian(2.0),
    dist.gaussian(1.0, sigma=2.5),
    dist.subbotin(1.0, 2.0),
    dist.subbotin(2.0, 1.5),
    dist.subbotin(3.5, 1.0, sigma=0.7),
    dist.chi_square(1, a2=4.0),
    dist.chi_square(5, a=3.0),
    dist.chi_square(5, a2=30.0, sigma=1.3),
]


def ids(spec):
    return f"{spec.kind}-a{spec.a:.2f}-s{spec.sigma}-nu{spec.nu}-k{spec.k}"


class TestSpec:
    def test_rejects_bad_parameters(self):
        with pytest.raises(DomainError):
            dist.DistributionSpec("cauchy")
        with pytest.raises(DomainError):
            dist.gaussian(1.0, sigma=0.0)
        with pytest.raises(DomainError):
            dist.gaussian(-1.0)
        with pytest.raises(DomainError):
            dist.subbotin(0.5)
        with pytest.raises(DomainError):
            dist.chi_square(0, a=1.0)
        with pytest.raises(DomainError):
            dist.chi_square(3, a=1.0, a2=1.0)

    def test_chi2_noncentrality_is_squared_norm(self):
        assert dist.chi_square(3, a2=9.0).a == 3.0
        assert dist.chi_square(3, a=3.0).noncentrality == pytest.approx(9.0)
        assert dist.chi_square(3, a=3.0, sigma=2.0).noncentrality == pytest.approx(2.25)


class TestDensities:
    def test_closed_forms(self):
        assert dist.log_pdf(dist.chi_square(2, a=0.0), NULL, 2.0) == pytest.approx(-1 - math.log(2))
        assert dist.log_pdf(dist.subbotin(1.0), NULL, 0.0) == pytest.approx(math.log(0.5))
        assert dist.log_pdf(dist.subbotin(2.0), NULL, 0.0) == pytest.approx(-0.9189385332046727,
                                                                             abs=1e-14)

    def test_subbotin_two_is_gaussian(self):
        x = np.linspace(-5, 5, 41)
        np.testing.assert_allclose(dist.log_pdf(dist.subbotin(2.0, 1.0), ALT, x),
                                   stats.norm.logpdf(x, loc=1.0), atol=1e-12)

    def test_chi2_alt_matches_scipy(self):
        spec = dist.chi_square(5, a2=10.0, sigma=1.5)
        x = np.linspace(0.1, 80, 50)
        ref = stats.ncx2.logpdf(x / 2.25, 5, 10.0 / 2.25) - math.log(2.25)
        np.testing.assert_allclose(dist.log_pdf(spec, ALT, x), ref, rtol=1e-10)

    @pytest.mark.parametrize("spec", SPECS, ids=ids)
    @pytest.mark.parametrize("side", [NULL, ALT])
    def test_density_integrates_to_one(self, spec, side):
        lo = 0.0 if spec.kind == "chi2" else -np.inf
        val, _ = integrate.quad(lambda v: math.exp(dist.log_pdf(spec, side, v)) if v > 0 or
                                lo < 0 else 0.0, lo, np.inf, limit=200)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_support_violation(self):
        with pytest.raises(DomainError):
            dist.log_pdf(dist.chi_square(3, a=1.0), NULL, 0.0)
        with pytest.raises(DomainError):
            dist.log_lr(dist.chi_square(3, a=1.0), np.array([1.0, -2.0]))
        with pytest.raises(DomainError):
            dist.log_lr(dist.gaussian(1.0), np.nan)


class TestLogRatio:
    def test_examples(self):
        assert dist.log_lr(dist.gaussian(2.0), 1.0) == pytest.approx(0.0)
        assert dist.log_lr(dist.chi_square(4, a=0.0), 3.7) == 0.0
        assert dist.log_lr(dist.chi_square(2, a=1.0), 1e-300) == pytest.approx(-0.5)

    @pytest.mark.parametrize("spec", SPECS, ids=ids)
    def test_equals_density_difference(self, spec):
        x = np.linspace(0.2, 12, 30)
        np.testing.assert_allclose(dist.log_lr(spec, x),
                                   dist.log_pdf(spec, ALT, x) - dist.log_pdf(spec, NULL, x),
                                   atol=1e-10)

    @pytest.mark.parametrize("spec", SPECS, ids=ids)
    def test_mlr(self, spec):
        grid = np.linspace(1e-3, 100, 2000) if spec.kind == "chi2" else np.linspace(-10, 10, 1000)
        assert dist.check_mlr(spec, grid)

    def test_mlr_negative_control(self, monkeypatch):
        spec = dist.gaussian(2.0)
        grid = np.linspace(-10, 10, 1000)
        real = dist.log_lr

        def swapped(s, x):
            v = np.array(real(s, x))
            v[[100, 101]] = v[[101, 100]]
            return v

        monkeypatch.setattr(dist, "log_lr", swapped)
        assert not dist.check_mlr(spec, grid)

    def test_mlr_grid_validation(self):
        with pytest.raises(DomainError):
            dist.check_mlr(dist.gaussian(1.0), [])
        with pytest.raises(DomainError):
            dist.check_mlr(dist.gaussian(1.0), [1.0, 0.0])


class TestCdfQuantile:
    def test_examples(self):
        assert dist.cdf(dist.gaussian(1.0), NULL, 0.0) == 0.5
        assert dist.quantile(dist.subbotin(1.0, 1.0), NULL, 0.5) == pytest.approx(0.0, abs=1e-10)
        assert dist.cdf(dist.chi_square(2, a=0.0), NULL, 2 * math.log(2)) == pytest.approx(0.5)

    @pytest.mark.parametrize("spec", SPECS, ids=ids)
    def test_against_scipy(self, spec):
        x = np.linspace(0.05, 40, 60) if spec.kind == "chi2" else np.linspace(-6, 8, 60)
        sig = spec.sigma
        for side in (NULL, ALT):
            shift = spec.a * side
            if spec.kind == "gaussian":
                ref = stats.norm.cdf(x, loc=shift, scale=sig)
            elif spec.kind == "subbotin":
                # gennorm uses exp(-|x|^beta); rescale by nu^(1/nu)
                ref = stats.gennorm.cdf((x - shift) / (sig * spec.nu ** (1 / spec.nu)), spec.nu)
            else:
                lam = spec.noncentrality * side
                z = x / sig ** 2
                ref = stats.ncx2.cdf(z, spec.k, lam) if lam else stats.chi2.cdf(z, spec.k)
            np.testing.assert_allclose(dist.cdf(spec, side, x), ref, atol=1e-12)
            np.testing.assert_allclose(dist.sf(spec, side, x), 1 - ref, atol=1e-12)

    def test_alt_with_zero_amplitude_is_central(self):
        spec = dist.chi_square(7, a=0.0)
        x = np.linspace(0.01, 30, 100)
        np.testing.assert_allclose(dist.cdf(spec, ALT, x), dist.cdf(spec, NULL, x), atol=1e-12)

    @pytest.mark.parametrize("spec", SPECS, ids=ids)
    def test_round_trips(self, spec):
        rng = np.random.default_rng(3)
        for p in rng.uniform(0.001, 0.999, size=60):
            for side in (NULL, ALT):
                q = dist.quantile(spec, side, p)
                assert dist.cdf(spec, side, q) == pytest.approx(p, abs=1e-8)
                assert dist.quantile(spec, side, dist.cdf(spec, side, q)) == pytest.approx(q, abs=1e-7)

    def test_quantile_domain(self):
        for p in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(DomainError):
                dist.quantile(dist.gaussian(1.0), NULL, p)

    def test_quantile_vectorised(self):
        q = dist.quantile(dist.gaussian(0.0), NULL, [0.1, 0.5, 0.9])
        np.testing.assert_allclose(q, stats.norm.ppf([0.1, 0.5, 0.9]), atol=1e-9)


class TestSampling:
    def test_deterministic(self):
        spec = dist.subbotin(1.5, 1.0)
        a = dist.sample(spec, ALT, np.random.default_rng(5), size=10)
        b = dist.sample(spec, ALT, np.random.default_rng(5), size=10)
        np.testing.assert_array_equal(a, b)

    def test_chi2_alt_mean(self):
        spec = dist.chi_square(5, a2=4.0)
        x = dist.sample(spec, ALT, np.random.default_rng(11), size=1_000_000)
        assert abs(x.mean() - 9.0) <= 4 * x.std() / math.sqrt(x.size)

    def test_subbotin_two_is_normal(self):
        x = dist.sample(dist.subbotin(2.0), NULL, np.random.default_rng(2), size=100_000)
        assert stats.kstest(x, "norm").pvalue > 1e-3

    @pytest.mark.parametrize("nu", [1.0, 1.5, 3.0])
    def test_subbotin_ks(self, nu):
        spec = dist.subbotin(nu, 1.0, sigma=1.7)
        x = dist.sample(spec, ALT, np.random.default_rng(8), size=50_000)
        assert stats.kstest(x, lambda v: dist.cdf(spec, ALT, v)).pvalue > 1e-3

    def test_pattern_side(self):
        spec = dist.gaussian(50.0)
        x = dist.sample(spec, np.array([1, 0, 1, 0]), np.random.default_rng(0))
        assert x.shape == (4,)
        assert x[0] > 25 and x[2] > 25 and x[1] < 25 and x[3] < 25
        with pytest.raises(DomainError):
            dist.sample(spec, np.array([2, 0]), np.random.default_rng(0))


class TestSubbotinClass:
    u = np.linspace(0, 10, 201)

    def test_members(self):
        assert dist.subbotin_class_check(2.0, self.u)
        assert dist.subbotin_class_check(1.0, self.u)

    def test_wide_gaussian_is_not_a_member(self):
        assert not dist.subbotin_class_check(2.0, self.u, dist.gaussian(0.0, sigma=2.0))

    def test_shape_validation(self):
        with pytest.raises(DomainError):
            dist.subbotin_class_check(0.5, self.u)
