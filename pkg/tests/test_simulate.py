import json
import math

import numpy as np
import pytest
from scipy import stats

from bdm.numerics import DomainError
from bdm.simulate import (
    METHODS,
    SimulationPlan,
    bdm_trend,
    false_positive_study,
    ks_critical_value,
    ks_statistic,
    simulate_measures,
    uniformity_study,
)


def small_plan(**kw):
    base = dict(sample_sizes=(10, 100), replications=400)
    base.update(kw)
    return SimulationPlan(**base)


class TestPlan:
    @pytest.mark.parametrize("kw", [dict(replications=99), dict(family="weibull"), dict(sample_sizes=(0,)),
                                    dict(theta_h=-1.0), dict(omegas=(1.0,)), dict(ev_method="grid"),
                                    dict(draws=0)])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            SimulationPlan(**kw)

    def test_stream_ids_unique(self):
        p = SimulationPlan()
        ids = {p.stream_id(n, r) for n in (10, 100, 1000) for r in range(0, 5000, 7)}
        assert len(ids) == 3 * len(range(0, 5000, 7))

    def test_as_dict_roundtrip(self):
        p = SimulationPlan(sample_sizes=[10], omegas=[0.9])
        assert json.loads(json.dumps(p.as_dict()))["sample_sizes"] == [10]


class TestMeasures:
    def test_bounds_and_shape(self):
        m = simulate_measures(small_plan(), 10)
        assert m.shape == (400, 3)
        assert np.all((m >= 0) & (m <= 1))

    def test_delta_matches_posterior_route(self):
        from bdm.discrepancy import scalar_bdm
        from bdm.numerics import RngStream
        from bdm.posteriors import exp_jeffreys_posterior

        plan = small_plan()
        m = simulate_measures(plan, 10)
        for r in (0, 17, 399):
            x = RngStream(plan.seed, plan.stream_id(10, r)).exponential(plan.theta_star, 10)
            d = scalar_bdm(exp_jeffreys_posterior(10, x.sum()), plan.theta_h).delta
            assert m[r, 0] == pytest.approx(d, abs=1e-12)

    def test_chunking_and_workers_do_not_matter(self):
        plan = small_plan()
        a = simulate_measures(plan, 100, chunk=400)
        b = simulate_measures(plan, 100, chunk=37)
        c = simulate_measures(plan, 100, workers=2, chunk=100)
        assert np.array_equal(a, b) and np.array_equal(a, c)

    def test_monte_carlo_evalues_track_level_set(self):
        ls = simulate_measures(small_plan(replications=100), 10)
        mc = simulate_measures(small_plan(replications=100, ev_method="monte-carlo", draws=4000), 10)
        assert np.array_equal(ls[:, 0], mc[:, 0])
        se = np.sqrt(ls[:, 1:] * (1 - ls[:, 1:]) / 4000)
        assert np.all(np.abs(ls[:, 1:] - mc[:, 1:]) <= 5 * se + 1e-3)

    def test_poisson_family(self):
        m = simulate_measures(small_plan(family="poisson", theta_star=3.0, theta_h=3.0), 10)
        assert np.all((m >= 0) & (m <= 1))
        # integer data make delta discrete, but it stays roughly uniform
        assert abs(np.mean(m[:, 0]) - 0.5) < 0.08


class TestFalsePositives:
    def test_desk_scale_bands(self):
        plan = SimulationPlan(sample_sizes=(10, 100, 1000), replications=5000)
        table = false_positive_study(plan)
        assert table.within_band(3.0)
        for method in METHODS:
            for w in plan.omegas:
                for n in plan.sample_sizes:
                    r = table.rate(method, w, n)
                    assert abs(r - (1 - w)) <= 3 * math.sqrt(w * (1 - w) / 5000)
                    assert table.std_err(method, w, n) == pytest.approx(math.sqrt(r * (1 - r) / 5000))

    def test_reproducible_bytes(self):
        a = false_positive_study(small_plan(seed=7))
        b = false_positive_study(small_plan(seed=7))
        assert a.to_csv() == b.to_csv() and a.to_json() == b.to_json()
        assert a.to_csv() != false_positive_study(small_plan(seed=8)).to_csv()

    def test_layout(self):
        rows = false_positive_study(small_plan()).rows()
        assert len(rows) == 3 * 3 * 2
        assert rows[0]["omega"] == 0.9 and [r["method"] for r in rows[:3]] == list(METHODS)

    def test_threshold_limit(self):
        table = false_positive_study(small_plan(omegas=(0.999999,)))
        assert all(r["rate"] <= 0.005 for r in table.rows())

    def test_alternative_rejects_more(self):
        table = false_positive_study(small_plan(theta_h=2.4))
        assert table.rate("bdm", 0.95, 100) > 0.9
        assert not table.within_band()


class TestUniformity:
    def test_ks_statistic_against_scipy(self):
        u = np.random.default_rng(1).uniform(size=777)
        assert ks_statistic(u) == pytest.approx(stats.kstest(u, "uniform").statistic, abs=1e-15)

    def test_critical_value(self):
        assert ks_critical_value(5000, 0.01) == pytest.approx(1.6276 / math.sqrt(5000), rel=1e-4)
        with pytest.raises(DomainError):
            ks_critical_value(10, 1.5)
        with pytest.raises(DomainError):
            ks_statistic([])

    def test_null_passes(self):
        res = uniformity_study(SimulationPlan(sample_sizes=(10,), replications=5000))[0]
        assert res.passed and 0 <= res.statistic <= 1
        assert res.as_dict()["pass"] is True

    def test_alternative_fails(self):
        res = uniformity_study(SimulationPlan(sample_sizes=(10,), replications=5000, theta_h=2.4))[0]
        assert not res.passed

    def test_smoke(self):
        res = uniformity_study(SimulationPlan(sample_sizes=(10,), replications=100))[0]
        assert 0 <= res.statistic <= 1


class TestTrend:
    MLES = [0.8, 1.2, 1.6, 3.2, 3.6, 4.0]

    def test_anchor_values(self):
        t = bdm_trend([1.2], [6, 24])
        assert abs(t.values[0, 0] - 0.832) <= 0.005 and abs(t.values[0, 1] - 0.997) <= 0.003

    def test_monotone_far_side(self):
        ns = list(range(2, 201))
        t = bdm_trend(self.MLES, ns)
        for m in (0.8, 1.2):
            assert np.all(np.diff(t.column(m)) >= 0)

    def test_tends_to_one(self):
        t = bdm_trend(self.MLES, [5000])
        assert np.all(t.values[:, 0] > 0.99)

    def test_consistency_median_over_simulations(self):
        from bdm.numerics import RngStream

        medians = []
        for n in (6, 12, 24, 48, 200):
            sums = np.array([RngStream(0, n * 1000 + r).exponential(1.2, n).sum() for r in range(200)])
            medians.append(float(np.median(bdm_trend(list(sums / n), [n]).values[:, 0])))
        assert all(b >= a for a, b in zip(medians[:4], medians[1:4]))
        assert medians[-1] > 0.999

    def test_outputs(self):
        t = bdm_trend([1.2, 3.2], [6, 12])
        assert t.to_csv().splitlines()[0] == "mle,n,delta"
        assert len(json.loads(t.to_json())["rows"]) == 4
        with pytest.raises(DomainError):
            bdm_trend([0.0], [5])
