import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from bdm.discrepancy import scalar_bdm
from bdm.models import (
    BYZANTINE_CORE,
    BYZANTINE_PERIPHERY,
    EX3_DATA,
    JUG_BRIDGE,
    cv_hypothesis,
    gamma_hypothesis,
    sample_stats,
    skewness_hypothesis,
    two_gamma_posterior,
)
from bdm.numerics import DomainError, Interval, RngStream
from bdm.posteriors import (
    MethodUnsupportedError,
    NormalizationError,
    PartitioningHypothesis,
    PartitionProbabilities,
    QuadraturePosterior,
    StudentTPosterior,
    beta_posterior,
    comparison_hypothesis,
    coordinate_hypothesis,
    exp_jeffreys_posterior,
    gamma_alpha_marginal,
    gamma_conditional_beta_cdf,
    gamma_posterior,
    ig_mean_posterior,
    ig_posterior,
    normal_approx_posterior,
    normal_gamma_posterior,
    partition_probabilities,
    poisson_jeffreys_posterior,
    two_population,
)

EX3 = sample_stats(EX3_DATA)
JUG = sample_stats(JUG_BRIDGE)


def ex3_joint():
    return gamma_posterior(EX3["n"], EX3["mean"], EX3["geo_mean"])


def jug_joint():
    return ig_posterior(JUG["n"], JUG["mean"], JUG["harm_mean"])


def byzantine():
    a, b = sample_stats(BYZANTINE_CORE), sample_stats(BYZANTINE_PERIPHERY)
    return two_population(normal_gamma_posterior(a["mean"], a["n"], a["s2"]),
                          normal_gamma_posterior(b["mean"], b["n"], b["s2"]))


SCALARS = {
    "inverse-gamma": lambda: exp_jeffreys_posterior(6, 7.2),
    "gamma": lambda: poisson_jeffreys_posterior(10, 23.0),
    "beta": lambda: beta_posterior(12, 30),
    "normal": lambda: normal_approx_posterior(0.512, 14928),
    "student-t": lambda: StudentTPosterior(1.0, 0.4, 7.0),
    "gamma-shape": lambda: gamma_alpha_marginal(EX3["n"], EX3["mean"], EX3["geo_mean"]),
    "ig-mean": lambda: ig_mean_posterior(8, 4.2, 5.0),
}


# ----------------------------------------------------------- closed forms

class TestClosedForms:
    def test_exp_jeffreys_is_inverse_gamma(self):
        post = exp_jeffreys_posterior(6, 7.2)
        ref = stats.invgamma(6, scale=7.2)
        for t in (0.3, 1.0, 1.27, 2.4, 9.0):
            assert post.cdf(t) == pytest.approx(ref.cdf(t), rel=1e-12)
            assert post.pdf(t) == pytest.approx(ref.pdf(t), rel=1e-12)

    @pytest.mark.parametrize("n,sx,median", [(6, 7.2, 1.27), (12, 14.4, 1.23)])
    def test_exp_medians(self, n, sx, median):
        post = exp_jeffreys_posterior(n, sx)
        assert abs(post.median() - median) <= 0.005
        assert post.cdf(post.quantile(0.5)) == pytest.approx(0.5, abs=1e-12)

    def test_poisson_jeffreys_is_gamma(self):
        post = poisson_jeffreys_posterior(10, 23.0)
        ref = stats.gamma(23.5, scale=1 / 10)
        for t in (1.0, 2.3, 4.0):
            assert post.cdf(t) == pytest.approx(ref.cdf(t), rel=1e-12)

    def test_beta_mean_and_uniform(self):
        assert beta_posterior(7640, 7288).mean() == pytest.approx(7641 / 14930, abs=1e-12)
        assert beta_posterior(0, 0).cdf(0.5) == pytest.approx(0.5, abs=1e-15)

    def test_beta_cdf_against_riemann_sum(self):
        # midpoint rule with 10**7 nodes on the log density, normalized by log-beta
        a, b, t = 7641.0, 7289.0, 0.512
        m = 10_000_000
        x = (np.arange(m) + 0.5) * (t / m)
        logc = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        riemann = float(np.exp(logc + (a - 1) * np.log(x) + (b - 1) * np.log1p(-x)).sum() * (t / m))
        assert abs(beta_posterior(7640, 7288).cdf(t) - riemann) <= 1e-6

    @pytest.mark.parametrize("theta_h,delta", [(0.5, 0.996), (1050 / 2050, 0.079)])
    def test_normal_approximation_births(self, theta_h, delta):
        post = normal_approx_posterior(7640 / 14928, 14928)
        assert abs(scalar_bdm(post, theta_h).delta - delta) <= 0.005

    @pytest.mark.xfail(strict=True, reason="theta_hat rounded to 0.512 moves the median past 1050/2050")
    def test_normal_approximation_rounded_mle(self):
        post = normal_approx_posterior(0.512, 14928)
        assert post.sd == pytest.approx(math.sqrt(0.512 * 0.488 / 14928))
        assert abs(scalar_bdm(post, 1050 / 2050).delta - 0.079) <= 0.005

    def test_rounded_mle_first_hypothesis(self):
        assert abs(scalar_bdm(normal_approx_posterior(0.512, 14928), 0.5).delta - 0.996) <= 0.005

    def test_normal_at_its_mean(self):
        assert scalar_bdm(normal_approx_posterior(0.512, 14928), 0.512).delta == pytest.approx(0, abs=1e-12)

    def test_student_t_against_scipy(self):
        post = StudentTPosterior(1.0, 0.4, 7.0)
        ref = stats.t(7.0, loc=1.0, scale=0.4)
        for t in (-3.0, 0.2, 1.0, 1.9, 8.0):
            assert post.cdf(t) == pytest.approx(ref.cdf(t), rel=1e-11, abs=1e-15)
            assert post.sf(t) == pytest.approx(ref.sf(t), rel=1e-11, abs=1e-15)

    def test_conditional_beta_cdf(self):
        assert gamma_conditional_beta_cdf(2.0, 9, 2.8, 1.3) == pytest.approx(
            stats.gamma(18.0, scale=1 / 25.2).cdf(1.3), rel=1e-12)
        assert gamma_conditional_beta_cdf(2.0, 9, 2.8, math.inf) == 1.0


@pytest.mark.parametrize("bad", [
    lambda: exp_jeffreys_posterior(0, 1.0),
    lambda: exp_jeffreys_posterior(3, -1.0),
    lambda: beta_posterior(-1, 2),
    lambda: beta_posterior(1, 2, 0.0, 1.0),
    lambda: normal_approx_posterior(1.0, 10),
    lambda: normal_gamma_posterior(1.0, 1, 1.0),
    lambda: normal_gamma_posterior(1.0, 5, 0.0),
    lambda: gamma_alpha_marginal(9, 2.0, 2.5),
    lambda: ig_posterior(5, 1.0, 1.5),
])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        bad()


# ------------------------------------------------------ quadrature families

class TestQuadratureMarginals:
    def test_gamma_shape_tail(self):
        post = gamma_alpha_marginal(EX3["n"], EX3["mean"], EX3["geo_mean"])
        assert abs(post.sf(2.5) - 0.215) <= 0.01

    def test_gamma_shape_tail_from_rounded_statistics(self):
        assert abs(gamma_alpha_marginal(9, 2.789, 2.108).sf(2.5) - 0.215) <= 0.01

    def test_gamma_shape_mode_near_mle(self):
        post = gamma_alpha_marginal(EX3["n"], EX3["mean"], EX3["geo_mean"])
        grid = np.linspace(0.05, 8, 20000)
        mode = grid[np.argmax(post.log_density(grid))]
        assert abs(mode - 1.921) <= 0.5

    @pytest.mark.parametrize("median_or_h,value,tol", [("median", 4.483, 0.01), (2.5, 0.975, 0.005),
                                                       (12.0, 0.907, 0.005)])
    def test_ig_mean(self, median_or_h, value, tol):
        post = ig_mean_posterior(8, 4.2, 5.0)
        got = post.median() if median_or_h == "median" else scalar_bdm(post, median_or_h).delta
        assert abs(got - value) <= tol

    def test_kernel_must_be_integrable(self):
        with pytest.raises(NormalizationError):
            QuadraturePosterior(lambda x: np.zeros_like(np.asarray(x, float)), Interval(0, math.inf))


# ------------------------------------------------------ scalar invariants

@pytest.mark.parametrize("name", list(SCALARS))
class TestScalarInvariants:
    def test_quantile_inverts_cdf(self, name):
        post = SCALARS[name]()
        for p in np.linspace(5e-5, 1 - 5e-5, 41):
            t = post.quantile(p)
            assert abs(post.quantile(post.cdf(t)) - t) <= 1e-8 * max(1.0, abs(t))

    def test_density_integrates_to_one(self, name):
        assert abs(SCALARS[name]().expect() - 1.0) <= 1e-8

    def test_cdf_monotone_with_limits(self, name):
        post = SCALARS[name]()
        t = post.quantile(np.linspace(1e-6, 1 - 1e-6, 200))
        c = np.asarray(post.cdf(t))
        assert np.all(np.diff(c) >= -1e-15)
        assert post.cdf(post.support.lo) == pytest.approx(0.0, abs=1e-12)
        assert post.cdf(post.support.hi) == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.asarray(post.pdf(t)) >= 0)

    def test_sampler_moments(self, name):
        post = SCALARS[name]()
        x = post.sample(RngStream(11, 0), 20_000)
        mean = post.expect(lambda t: t)
        var = post.expect(lambda t: (t - mean) ** 2)
        assert abs(x.mean() - mean) <= 4 * math.sqrt(var / x.size)

    def test_log_reparametrization(self, name):
        post = SCALARS[name]()
        if post.support.lo != 0.0 or not math.isinf(post.support.hi):
            pytest.skip("needs support (0, inf)")
        lam = post.log_reparametrized()
        for p in (0.02, 0.3, 0.5, 0.81, 0.995):
            t = post.quantile(p)
            assert lam.cdf(math.log(t)) == pytest.approx(p, abs=1e-8)
            assert scalar_bdm(lam, math.log(t)).delta == pytest.approx(scalar_bdm(post, t).delta, abs=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 200), st.floats(0.05, 500.0), st.floats(0.01, 0.99))
def test_inverse_gamma_quantile_roundtrip(n, sx, p):
    post = exp_jeffreys_posterior(n, sx)
    assert post.cdf(post.quantile(p)) == pytest.approx(p, abs=1e-10)


# ------------------------------------------------------- joint posteriors

JOINTS = {
    "normal-gamma": lambda: normal_gamma_posterior(17.0, 10, 1.6),
    "gamma": ex3_joint,
    "inverse-gaussian": jug_joint,
}


@pytest.mark.parametrize("name", list(JOINTS))
class TestJointInvariants:
    def test_normalization(self, name):
        assert abs(JOINTS[name]().check_normalization() - 1.0) <= 1e-6

    def test_marginal_matches_iterated_quadrature(self, name):
        post = JOINTS[name]()
        indices = [0, 1] if name == "normal-gamma" else [0]
        for idx in indices:
            m = post.marginal(idx)
            probes = m.quantile(np.linspace(0.005, 0.995, 100))
            for x in probes:
                assert abs(post.quadrature_marginal_pdf(idx, float(x)) - float(m.pdf(x))) <= 1e-8

    def test_sampler_moments(self, name):
        post = JOINTS[name]()
        x = post.sample(RngStream(3, 1), 40_000)
        for idx in (0, 1):
            try:
                m = post.marginal(idx)
            except MethodUnsupportedError:
                continue
            mean = m.expect(lambda t: t)
            sd = math.sqrt(m.expect(lambda t: (t - mean) ** 2))
            assert abs(x[:, idx].mean() - mean) <= 3 * sd / math.sqrt(x.shape[0])


def test_normal_gamma_mu_marginal_centred():
    post = normal_gamma_posterior(17.0, 10, 1.6)
    assert post.marginal(0).median() == pytest.approx(17.0, abs=1e-10)
    assert post.marginal(0).expect(lambda t: t) == pytest.approx(17.0, rel=1e-10)


def test_ig_conditional_rate_at_mean():
    n, a, h = JUG["n"], JUG["mean"], JUG["harm_mean"]
    rate = 0.5 * n * (a / a**2 - 2 / a + 1 / h)
    assert rate == pytest.approx(0.5 * n * (1 / h - 1 / a)) and rate >= 0


# ------------------------------------------------- partition probabilities

GOLDEN = [
    ("ex3-mean", ex3_joint, lambda: gamma_hypothesis("mean", 6.0), "b", 0.012, 0.005),
    ("ex4-n10", lambda: normal_gamma_posterior(17.0, 10, 1.6), lambda: cv_hypothesis(0.1), "b", 0.215, 0.01),
    ("ex4-n40", lambda: normal_gamma_posterior(17.0, 40, 1.6), lambda: cv_hypothesis(0.1), "b", 0.014, 0.005),
    ("ex5", jug_joint, lambda: skewness_hypothesis(2.0), "b", 0.078, 0.01),
    ("ex6-means", byzantine, lambda: comparison_hypothesis(0, 2), "b", 0.089, 0.005),
    ("ex6-precisions", byzantine, lambda: comparison_hypothesis(1, 3), "b", 0.046, 0.005),
    ("ex7", two_gamma_posterior, lambda: comparison_hypothesis(0, 2), "a", 0.311, 0.01),
]


@pytest.mark.parametrize("label,post,hyp,side,value,tol", GOLDEN, ids=[g[0] for g in GOLDEN])
def test_partition_golden(label, post, hyp, side, value, tol):
    pp = partition_probabilities(post(), hyp(), "quadrature")
    assert pp.external_side == side
    assert abs(pp.external - value) <= tol
    assert pp.p_a + pp.p_b == pytest.approx(1.0, abs=1e-8)


@pytest.mark.xfail(strict=True, reason="quadrature gives 0.0836 from the transcribed data")
def test_partition_gamma_variance():
    pp = partition_probabilities(ex3_joint(), gamma_hypothesis("variance", 2.0), "quadrature")
    assert abs(pp.p_a - 0.078) <= 0.005


def test_ex5_delta():
    pp = partition_probabilities(jug_joint(), skewness_hypothesis(2.0))
    assert abs(1 - 2 * min(pp.p_a, pp.p_b) - 0.844) <= 0.02


@pytest.mark.parametrize("label,post,hyp,side,value,tol", GOLDEN, ids=[g[0] for g in GOLDEN])
def test_monte_carlo_agrees_with_quadrature(label, post, hyp, side, value, tol):
    p, h = post(), hyp()
    q = partition_probabilities(p, h, "quadrature")
    mc = partition_probabilities(p, h, "monte-carlo", RngStream(5, 0), draws=50_000)
    se = math.sqrt(q.external * (1 - q.external) / 50_000)
    assert abs(mc.external - q.external) <= 4 * se
    assert mc.mc_std_err == pytest.approx(math.sqrt(mc.external * (1 - mc.external) / 50_000))


@pytest.mark.parametrize("transform", [np.log, np.exp, lambda v: v**3, np.arctan])
def test_partition_invariant_under_monotone_transform(transform):
    post = normal_gamma_posterior(17.0, 10, 1.6)
    base = cv_hypothesis(0.1)
    moved = PartitioningHypothesis(lambda th: transform(base.phi(th)), float(transform(0.1)),
                                   section=base.section, section_side=base.section_side)
    rng_draws = post.sample(RngStream(8, 0), 20_000)
    with np.errstate(all="ignore"):
        a0 = base.phi(rng_draws) < base.phi_H
        a1 = moved.phi(rng_draws) < moved.phi_H
    assert np.array_equal(a0, a1)
    q0 = partition_probabilities(post, base)
    q1 = partition_probabilities(post, moved)
    assert q0 == q1
    m0 = partition_probabilities(post, base, "monte-carlo", RngStream(2, 2), 20_000)
    m1 = partition_probabilities(post, moved, "monte-carlo", RngStream(2, 2), 20_000)
    assert (m0.p_a, m0.p_b) == (m1.p_a, m1.p_b)


def test_scalar_partition_is_closed_form():
    pp = partition_probabilities(exp_jeffreys_posterior(6, 7.2), coordinate_hypothesis(0, 2.4))
    assert pp.p_method == "closed-form" and pp.p_b == pytest.approx(0.084, abs=0.003)


def test_quadrature_needs_structure():
    hyp = PartitioningHypothesis(lambda th: th[..., 0] * th[..., 1], 1.0)
    with pytest.raises(MethodUnsupportedError):
        partition_probabilities(normal_gamma_posterior(17.0, 10, 1.6), hyp)
    with pytest.raises(MethodUnsupportedError):
        partition_probabilities(normal_gamma_posterior(17.0, 10, 1.6), comparison_hypothesis(0, 1))
    with pytest.raises(DomainError):
        partition_probabilities(normal_gamma_posterior(17.0, 10, 1.6), hyp, "monte-carlo")


def test_partition_probabilities_validated():
    with pytest.raises(DomainError):
        PartitionProbabilities(0.7, 0.4, "quadrature")
    with pytest.raises(DomainError):
        PartitionProbabilities(-0.1, 0.4, "quadrature")
    with pytest.raises(DomainError):
        PartitionProbabilities(0.1, 0.4, "guess")
    pp = PartitionProbabilities(0.3, 0.7, "closed-form")
    assert pp.external == 0.3 and pp.external_side == "a"
