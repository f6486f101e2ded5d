import math
from decimal import Decimal, localcontext

import numpy as np
import pytest

from spikedpca.bounds import (
    BoundConfig,
    compare_lower_forms,
    davis_kahan_bound,
    default_deviations,
    eigengap_lower,
    epsilon_budget,
    evaluate_bounds,
    lambda_bounds,
    lambda_lower_variants,
    noise_norm_bound,
    signal_condition,
    sintheta_bound,
    szarek_epsilon,
    szarek_tail,
    weyl_interval,
    wishart_norm_bound,
)
from spikedpca.errors import ConditionViolated, InvalidParameter, RegimeViolation


def config(sigma=0.3, kappa=2.8, p=200, n=50):
    return BoundConfig.with_defaults(p, n, sigma, kappa)


def high_precision_bounds(s1, s2, s3, p, n, sigma, kappa):
    """Eigenvalue and sin theta bounds evaluated with 50 significant digits."""
    with localcontext() as ctx:
        ctx.prec = 50
        s1, s2, s3, p, n = (Decimal(v) for v in (s1, s2, s3, p, n))
        sigma, kappa = Decimal(sigma), Decimal(kappa)
        x = 2 * sigma * s1 / (kappa * n.sqrt())
        q = (p - 1) / n
        a2 = s2 / (p - 1).sqrt()
        ratio = sigma * sigma / (kappa * kappa)
        second = ratio * q * (1 - a2) / (1 + x)
        third = ratio * ratio * q * q * (1 + a2) ** 2 / (1 - x) ** 3
        lower = kappa * kappa * (1 - x + second - third)
        inner = 1 + x + sigma * sigma * s3 / (kappa * kappa)
        upper = kappa * kappa * inner + sigma * kappa * q.sqrt() * inner.sqrt() * (1 + a2)
        sintheta = (sigma / kappa) * q.sqrt() * (1 + x) * (1 + a2) + 4 * Decimal(2).sqrt() * ratio * (
            p / n
        ) / (1 - x - ratio)
        return {"lower": +lower, "upper": +upper, "sintheta": +sintheta}


class TestConfig:
    def test_defaults_hit_the_level(self):
        cfg = config()
        _, eps1, eps2, eps3 = epsilon_budget(cfg)
        assert eps1 == pytest.approx(0.01, rel=1e-8)
        assert eps2 == pytest.approx(0.01, rel=1e-6)
        assert eps3 == pytest.approx(0.01, rel=1e-8)

    def test_default_deviation_values(self):
        s1, _, s3 = default_deviations(200, 0.01)
        assert s1 == pytest.approx(2.5758293035489, rel=1e-10)
        assert s3 == pytest.approx(6.6348966010212, rel=1e-10)

    @pytest.mark.parametrize(
        "changes",
        [{"s1": 0.0}, {"s2": -1.0}, {"p": 1}, {"n": 0}, {"sigma": -0.1}, {"kappa": 0.0}],
    )
    def test_rejects_invalid(self, changes):
        with pytest.raises(InvalidParameter):
            config().replace(**changes)


class TestBudget:
    def test_szarek_epsilon(self):
        assert szarek_epsilon(200) == pytest.approx(0.003798, abs=5e-7)

    def test_budget_is_sum(self):
        report = evaluate_bounds(config())
        assert report.budget == pytest.approx(report.eps + report.eps1 + report.eps2 + report.eps3)


class TestSignalCondition:
    def test_holds_in_reference_setting(self):
        assert signal_condition(config())

    def test_fails_for_large_noise(self):
        assert not signal_condition(config(sigma=3.0))

    def test_zero_noise_always_holds(self):
        assert signal_condition(config(sigma=0.0, kappa=0.01))

    def test_noise_norm_bound(self):
        assert noise_norm_bound(201, 50) == pytest.approx(13.0)


class TestEigenvalueBounds:
    def test_sandwich_kappa_squared(self):
        lower, upper = lambda_bounds(config())
        assert lower < 2.8**2 < upper

    def test_zero_noise_is_exact(self):
        lower, upper = lambda_bounds(config(sigma=0.0))
        assert lower == pytest.approx(2.8**2)
        assert upper == pytest.approx(2.8**2)
        assert sintheta_bound(config(sigma=0.0)) == 0.0

    def test_monotone_in_sigma(self):
        sigmas = np.linspace(0.0, 0.6, 13)
        bounds = [lambda_bounds(config(sigma=s)) for s in sigmas]
        lowers = [b[0] for b in bounds]
        uppers = [b[1] for b in bounds]
        assert all(b < a for a, b in zip(lowers, lowers[1:]))
        assert all(b > a for a, b in zip(uppers, uppers[1:]))

    def test_lower_bound_reference_values(self):
        lower, _ = lambda_bounds(config(sigma=0.3))
        assert lower / 2.8**2 == pytest.approx(0.949, abs=2e-3)

    def test_high_precision_reference(self):
        cfg = BoundConfig(s1=2, s2=2, s3=4, p=200, n=50, sigma=0.5, kappa=2.8)
        expected = high_precision_bounds(2, 2, 4, 200, 50, "0.5", "2.8")
        lower, upper = lambda_bounds(cfg)
        assert lower == pytest.approx(float(expected["lower"]), rel=1e-12)
        assert upper == pytest.approx(float(expected["upper"]), rel=1e-12)
        assert sintheta_bound(cfg) == pytest.approx(float(expected["sintheta"]), rel=1e-12)
        assert lower == pytest.approx(7.597039895182139, rel=1e-12)
        assert upper == pytest.approx(13.166637686113802, rel=1e-12)

    def test_not_claimed_without_signal_condition(self):
        with pytest.raises(ConditionViolated):
            lambda_bounds(config(sigma=3.0))

    def test_groupings_differ(self):
        printed, proof = lambda_lower_variants(config())
        assert printed != proof
        report = compare_lower_forms(config())
        assert report["difference"] == pytest.approx(printed - proof)


class TestSinTheta:
    def test_positive_and_small(self):
        bound = sintheta_bound(config())
        assert 0 < bound < 1

    def test_undefined_raises_and_warns(self, caplog):
        with pytest.raises(ConditionViolated):
            sintheta_bound(config(sigma=3.0))
        assert "undefined" in caplog.text

    def test_report_leaves_unclaimed_bounds_empty(self):
        report = evaluate_bounds(config(sigma=3.0))
        assert not report.condition_holds
        assert report.lambda_lower is None
        assert report.lambda_upper is None
        assert report.sintheta_upper is None

    def test_eigengap(self):
        cfg = config()
        expected = 2.8**2 - 2 * cfg.s1 * 0.3 * 2.8 / math.sqrt(50) - 0.09
        assert eigengap_lower(cfg) == pytest.approx(expected)


class TestWishart:
    def test_square_case(self):
        norm, centered, _ = wishart_norm_bound(100, 100)
        assert norm == pytest.approx(5.0)
        assert centered == pytest.approx(4.0)

    def test_reference_case(self):
        norm, centered, eps = wishart_norm_bound(200, 50)
        assert norm == pytest.approx(13.0)
        assert centered == pytest.approx(16.0)
        assert eps == pytest.approx(3.80e-3, abs=5e-6)

    def test_regime(self):
        with pytest.raises(RegimeViolation):
            wishart_norm_bound(50, 200)

    def test_tail_equals_eps_when_square(self):
        assert szarek_tail(300, 300, 1.0) == pytest.approx(szarek_epsilon(300), rel=1e-12)

    def test_tail_high_precision(self):
        with localcontext() as ctx:
            ctx.prec = 50
            p, n = Decimal(200), Decimal(100)
            base = 1 + (n / p).sqrt()
            t = (1 + base * base).sqrt() - base
            expected = (-(p / 2) * t * t).exp()
        assert szarek_tail(200, 100, 1.0) == pytest.approx(float(expected), rel=1e-12)

    def test_relaxed_is_looser(self):
        exact = szarek_tail(200, 100, 1.0)
        relaxed = szarek_tail(200, 100, 1.0, relaxed=True)
        assert relaxed > exact
        assert relaxed == pytest.approx(szarek_epsilon(200), rel=1e-12)

    def test_tail_decreases_with_p(self):
        values = [szarek_tail(p, 50, 0.5) for p in (50, 100, 400, 1600)]
        assert values == sorted(values, reverse=True)


class TestPerturbationInequalities:
    def test_weyl_interval_contains_eigenvalue(self, random_symmetric):
        a = np.diag([5.0, 1.0, 0.5, 0.0])
        b = 0.05 * random_symmetric(4, seed=2)
        lo, hi = weyl_interval(a, b)
        top = np.linalg.eigvalsh(a + b)[-1]
        assert lo - 1e-12 <= top <= hi + 1e-12

    def test_weyl_interval_condition(self):
        with pytest.raises(ConditionViolated):
            weyl_interval(np.diag([1.0, 0.9]), np.diag([0.0, 5.0]))

    def test_davis_kahan(self):
        assert davis_kahan_bound(0.5, 2.0) == 0.25
        with pytest.raises(ConditionViolated):
            davis_kahan_bound(0.5, 0.0)
