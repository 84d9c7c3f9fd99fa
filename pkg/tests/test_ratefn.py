"""Tests for the Legendre-transform engine and every rate function.

Closed-form oracles used here are derived independently of the library:

* Bernoulli(p): I(x) = x log(x/p) + (1-x) log((1-x)/(1-p))
* geometric ratio a: I(x) = x log(x / (a (1+x))) - log(1-a) - log(1+x)
* Poisson lam: I(x) = x log(x/lam) - x + lam
* two-point law on {1, 2} with equal masses:
  I(z) = (2-z) log(2(2-z)) + (z-1) log(2(z-1)) on [1, 2]

and a dense-grid brute-force maximization of theta*x - Lambda(theta).
"""

import math

import numpy as np
import pytest
from pytest import approx

import gwldp as gw
from gwldp import (HypothesisError, RateValue, build_model, cgf_of_pmf,
                   cgf_progeny_unit, compare_rates, legendre, pmf_from_dict,
                   pmf_from_family, rate_bivariate, rate_bivariate_oracle,
                   rate_estimator_deterministic, rate_estimator_meaninit,
                   rate_estimator_ratio, rate_initial, rate_offspring,
                   rate_progeny_closed, rate_progeny_direct,
                   rate_progeny_marginal, ratio_rate_via_contraction)

BERN = pmf_from_dict({0: 0.5, 1: 0.5})
G_HALF = pmf_from_dict({1: 0.5, 2: 0.5})

I_F_025 = 0.13081203594113697     # bernoulli_rate_oracle(0.25, 0.5)
I_F_23 = 0.056633012265132454     # bernoulli_rate_oracle(2/3, 0.5)
J_RATIO_025 = 0.2578262623802542  # -log g(exp(-I_F_025 / 0.75)) by hand


def bernoulli_rate_oracle(x, p=0.5):
    if not 0.0 <= x <= 1.0:
        return math.inf
    total = 0.0
    if x > 0.0:
        total += x * math.log(x / p)
    if x < 1.0:
        total += (1.0 - x) * math.log((1.0 - x) / (1.0 - p))
    return total


def geometric_rate_oracle(x, a):
    if x < 0.0:
        return math.inf
    if x == 0.0:
        return -math.log(1.0 - a)
    return (x * math.log(x / (a * (1.0 + x))) - math.log(1.0 - a)
            - math.log(1.0 + x))


def poisson_rate_oracle(x, lam):
    if x < 0.0:
        return math.inf
    if x == 0.0:
        return lam
    return x * math.log(x / lam) - x + lam


def two_point_rate_oracle(z):
    if not 1.0 <= z <= 2.0:
        return math.inf
    total = 0.0
    for w in (2.0 - z, z - 1.0):
        if w > 0.0:
            total += w * math.log(2.0 * w)
    return total


def grid_search_conjugate(support, probs, x, lo=-30.0, hi=30.0, n=2_000_001):
    """Brute-force sup of theta*x - log sum(p_h exp(theta h)) on a dense grid."""
    thetas = np.linspace(lo, hi, n)
    with np.errstate(over="ignore"):
        lam = np.log(np.exp(np.outer(thetas, support)) @ probs)
    vals = thetas * x - lam
    return float(np.max(vals[np.isfinite(vals)]))


class TestLegendreEngine:
    def test_zero_at_mean(self):
        assert rate_offspring(BERN, 0.5).value == approx(0.0, abs=1e-12)

    def test_interior_value_against_oracle(self):
        rv = rate_offspring(BERN, 0.25)
        assert rv.value == approx(I_F_025, abs=1e-10)
        assert isinstance(rv.argmax_theta, float)

    def test_lower_boundary_is_minus_log_mass(self):
        rv = rate_offspring(BERN, 0.0)
        assert rv.value == approx(math.log(2.0), abs=1e-14)
        assert rv.argmax_theta == "support_min"

    def test_upper_boundary_is_minus_log_mass(self):
        rv = rate_offspring(BERN, 1.0)
        assert rv.value == approx(math.log(2.0), abs=1e-14)
        assert rv.argmax_theta == "support_max"

    def test_outside_support_infinite(self):
        assert math.isinf(rate_offspring(BERN, -0.25).value)
        assert math.isinf(rate_offspring(BERN, 1.25).value)

    @pytest.mark.parametrize("x", [0.05, 0.2, 0.4285714285714286, 0.9, 2.0])
    def test_geometric_against_closed_oracle(self, x):
        f = pmf_from_family("geometric", {"a": 0.3}, truncation_K=40)
        assert rate_offspring(f, x).value == approx(
            geometric_rate_oracle(x, 0.3), abs=1e-9)

    @pytest.mark.parametrize("x", [0.1, 0.6, 1.0, 2.5])
    def test_poisson_against_closed_oracle(self, x):
        f = pmf_from_family("poisson", {"lambda": 0.6}, truncation_K=40)
        assert rate_offspring(f, x).value == approx(
            poisson_rate_oracle(x, 0.6), abs=1e-9)

    @pytest.mark.parametrize("x", [1.1, 1.5, 2.2])
    def test_two_point_against_closed_oracle(self, x):
        assert rate_initial(G_HALF, x).value == approx(
            two_point_rate_oracle(x), abs=1e-10)

    def test_brute_force_grid_oracle(self):
        # an untagged multi-point law: only the generic machinery applies
        pmf = pmf_from_dict({0: 0.3, 1: 0.2, 3: 0.1, 7: 0.4})
        cgf = cgf_of_pmf(pmf)
        for x in (0.5, 2.0, 4.5):
            brute = grid_search_conjugate(pmf.support.astype(float), pmf.probs, x)
            assert legendre(cgf, x).value == approx(brute, abs=1e-6)

    def test_degenerate_law(self):
        f0 = pmf_from_dict({0: 1.0})
        assert rate_offspring(f0, 0.0).value == 0.0
        assert math.isinf(rate_offspring(f0, 0.5).value)


class TestCgfEvaluators:
    @pytest.mark.parametrize("pmf", [BERN, G_HALF,
                                     pmf_from_family("geometric", {"a": 0.3},
                                                     truncation_K=40),
                                     pmf_from_family("poisson",
                                                     {"lambda": 0.6},
                                                     truncation_K=40)])
    def test_zero_at_origin(self, pmf):
        assert cgf_of_pmf(pmf).fn(0.0) == approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("pmf", [BERN, G_HALF])
    def test_midpoint_convexity(self, pmf):
        fn = cgf_of_pmf(pmf).fn
        thetas = np.linspace(-4.0, 4.0, 17)
        for t1, t2 in zip(thetas, thetas[2:]):
            mid = 0.5 * (t1 + t2)
            assert fn(mid) <= 0.5 * (fn(t1) + fn(t2)) + 1e-10

    def test_progeny_cgf_metadata(self):
        cgf = cgf_progeny_unit(BERN)
        assert cgf.fn(0.0) == approx(0.0, abs=1e-12)
        assert cgf.support_min == 1.0
        assert cgf.mean == approx(2.0)
        # G diverges where s/(2-s) blows up: radius 2
        assert cgf.theta_max == approx(math.log(2.0), abs=1e-9)

    def test_progeny_cgf_tangency_edge(self):
        # strictly convex offspring: the domain edge sits at the tangency
        # s* = 1/(4 a (1-a)) of u = s f(u) for the geometric family
        f = pmf_from_family("geometric", {"a": 0.3}, truncation_K=40)
        cgf = cgf_progeny_unit(f)
        assert cgf.theta_max == approx(math.log(1.0 / (4 * 0.3 * 0.7)), abs=1e-8)


class TestProgenyRates:
    def test_zero_at_mean(self):
        assert rate_progeny_closed(BERN, 2.0).value == approx(0.0, abs=1e-12)
        assert rate_progeny_direct(BERN, 2.0).value == approx(0.0, abs=1e-9)

    def test_closed_values(self):
        assert rate_progeny_closed(BERN, 4.0 / 3.0).value == approx(
            (4.0 / 3.0) * I_F_025, abs=1e-12)
        assert rate_progeny_closed(BERN, 3.0).value == approx(
            3.0 * I_F_23, abs=1e-12)

    def test_direct_matches_closed(self):
        assert rate_progeny_direct(BERN, 4.0 / 3.0).value == approx(
            (4.0 / 3.0) * I_F_025, abs=1e-6)

    def test_boundary_at_one(self):
        # P(Y = 1) = p_0, for both routes
        assert rate_progeny_direct(BERN, 1.0).value == approx(math.log(2.0),
                                                              abs=1e-12)
        assert rate_progeny_closed(BERN, 1.0).value == approx(math.log(2.0),
                                                              abs=1e-12)

    def test_below_one_infinite(self):
        assert math.isinf(rate_progeny_closed(BERN, 0.8).value)
        assert math.isinf(rate_progeny_direct(BERN, 0.8).value)

    def test_identity_on_grid(self):
        for f in (BERN, pmf_from_family("geometric", {"a": 0.3},
                                        truncation_K=40)):
            for y in np.linspace(1.05, 6.0, 25):
                direct = rate_progeny_direct(f, float(y)).value
                closed = rate_progeny_closed(f, float(y)).value
                assert direct == approx(closed, abs=1e-6)

    def test_critical_law_rejected(self):
        critical = pmf_from_dict({0: 0.5, 2: 0.5})
        with pytest.raises(HypothesisError):
            rate_progeny_closed(critical, 2.0)
        with pytest.raises(HypothesisError):
            rate_progeny_direct(critical, 2.0)


class TestBivariate:
    MODEL = build_model(BERN, G_HALF)

    def test_zero_at_joint_mean(self):
        assert rate_bivariate(self.MODEL, 3.0, 1.5).value == approx(0.0,
                                                                    abs=1e-12)

    def test_cone_violation_infinite(self):
        assert math.isinf(rate_bivariate(self.MODEL, 1.0, 2.0).value)
        assert math.isinf(rate_bivariate(self.MODEL, 2.0, -1.0).value)

    def test_component_sum(self):
        assert rate_bivariate(self.MODEL, 2.0, 1.0).value == approx(
            math.log(2.0), abs=1e-12)

    def test_origin_uses_initial_mass_at_zero(self):
        assert math.isinf(rate_bivariate(self.MODEL, 0.0, 0.0).value)
        with_q0 = build_model(BERN, pmf_from_dict({0: 0.25, 1: 0.75}))
        assert rate_bivariate(with_q0, 0.0, 0.0).value == approx(
            math.log(4.0), abs=1e-12)

    def test_oracle_agreement_spot_checks(self):
        for y, z in ((3.0, 1.5), (2.0, 1.0), (2.5, 1.2), (4.0, 1.9)):
            closed = rate_bivariate(self.MODEL, y, z).value
            oracle = rate_bivariate_oracle(self.MODEL, y, z).value
            assert oracle == approx(closed, abs=1e-5)

    def test_oracle_zero_at_joint_mean(self):
        assert rate_bivariate_oracle(self.MODEL, 3.0, 1.5).value == approx(
            0.0, abs=1e-8)

    def test_oracle_outside_cone(self):
        assert math.isinf(rate_bivariate_oracle(self.MODEL, 1.0, 2.0).value)


class TestEstimatorRates:
    MODEL = build_model(BERN, G_HALF)

    def test_zero_at_offspring_mean(self):
        assert rate_estimator_ratio(self.MODEL, 0.5).value == approx(0.0,
                                                                     abs=1e-12)

    def test_frozen_composition_value(self):
        assert rate_estimator_ratio(self.MODEL, 0.25).value == approx(
            J_RATIO_025, abs=1e-12)

    def test_outside_unit_interval_infinite(self):
        assert math.isinf(rate_estimator_ratio(self.MODEL, -0.1).value)
        assert math.isinf(rate_estimator_ratio(self.MODEL, 1.0).value)

    def test_initial_mass_at_zero_rejected(self):
        bad = build_model(BERN, pmf_from_dict({0: 0.5, 1: 0.5}))
        with pytest.raises(HypothesisError):
            rate_estimator_ratio(bad, 0.25)

    def test_deterministic_matches_unit_progeny_rate(self):
        # mu_g = 1 start: J(x) = I_f(x)/(1-x) = I_G(1/(1-x)) via y = 1/(1-x)
        rv = rate_estimator_deterministic(BERN, 1, 0.25)
        assert rv.value == approx((4.0 / 3.0) * I_F_025, abs=1e-12)
        assert rv.value == approx(rate_progeny_closed(BERN, 4.0 / 3.0).value,
                                  abs=1e-12)

    def test_deterministic_zero_and_infinite(self):
        assert rate_estimator_deterministic(BERN, 2, 0.5).value == approx(
            0.0, abs=1e-12)
        assert math.isinf(rate_estimator_deterministic(BERN, 2, 1.2).value)

    def test_deterministic_needs_at_least_one(self):
        with pytest.raises(HypothesisError):
            rate_estimator_deterministic(BERN, 0.5, 0.25)

    def test_contraction_route_matches_closed(self):
        for x in np.linspace(0.0, 0.9, 19):
            closed = rate_estimator_ratio(self.MODEL, float(x)).value
            contracted = ratio_rate_via_contraction(self.MODEL, float(x)).value
            assert contracted == approx(closed, abs=1e-6)

    def test_contraction_grid_dominates_closed(self):
        # any z-grid minimum of the joint rate along (y-z)/y = x sits above
        # the closed form, which the refined minimization then attains
        for x in (0.1, 0.25, 0.6):
            closed = rate_estimator_ratio(self.MODEL, x).value
            grid_min = min(
                rate_bivariate(self.MODEL, z / (1 - x), z).value
                for z in np.linspace(1.0, 2.0, 41))
            assert grid_min >= closed - 1e-6

    def test_meaninit_zero_at_mean(self):
        rv = rate_estimator_meaninit(self.MODEL, 0.5)
        assert rv.value == approx(0.0, abs=1e-12)
        assert rv.argmin_z == approx(1.5, abs=1e-6)

    def test_meaninit_childless_shortcut(self):
        model = build_model(pmf_from_dict({0: 1.0}), G_HALF)
        assert rate_estimator_meaninit(model, -0.5).value == approx(
            math.log(2.0), abs=1e-12)
        assert math.isinf(rate_estimator_meaninit(model, -0.6).value)
        # inside the finite range the rate is I_g(mu_g / (1-x))
        assert rate_estimator_meaninit(model, 0.0).value == approx(
            two_point_rate_oracle(1.5), abs=1e-12)
        assert rate_estimator_meaninit(model, -0.25).value == approx(
            two_point_rate_oracle(1.2), abs=1e-10)

    def test_meaninit_above_one_infinite(self):
        assert math.isinf(rate_estimator_meaninit(self.MODEL, 1.0).value)
        assert math.isinf(rate_estimator_meaninit(self.MODEL, 1.5).value)

    def test_marginal_matches_unit_start_for_identity_g(self):
        model = build_model(BERN, pmf_from_dict({1: 1.0}))
        for y in (1.5, 2.0, 3.0):
            assert rate_progeny_marginal(model, y).value == approx(
                rate_progeny_closed(BERN, y).value, abs=1e-12)

    def test_marginal_zero_at_nu(self):
        assert rate_progeny_marginal(self.MODEL, 3.0).value == approx(
            0.0, abs=1e-9)


class TestComparison:
    MODEL = build_model(BERN, G_HALF)

    def test_equality_at_mean(self):
        row = compare_rates(self.MODEL, [0.5])[0]
        assert row.j_random == approx(0.0, abs=1e-12)
        assert row.j_diamond == approx(0.0, abs=1e-12)
        assert row.leq_ok and not row.strict

    def test_strict_inequality_away_from_mean(self):
        row = compare_rates(self.MODEL, [0.25])[0]
        assert row.j_random == approx(J_RATIO_025, abs=1e-12)
        assert row.j_diamond == approx(1.5 * (4.0 / 3.0) * I_F_025, abs=1e-12)
        assert row.leq_ok and row.strict
        assert row.chain_ok is True
        assert row.extrapolated  # mu_g = 1.5 is not an integer

    def test_deterministic_initial_equality_everywhere(self):
        model = build_model(BERN, pmf_from_dict({2: 1.0}))
        for row in compare_rates(model, np.linspace(0.0, 1.2, 25)):
            if math.isinf(row.j_random):
                assert math.isinf(row.j_diamond)
            else:
                assert row.j_random == approx(row.j_diamond, abs=1e-12)

    def test_jensen_ordering_full_grid(self):
        for row in compare_rates(self.MODEL, np.linspace(0.0, 0.975, 40)):
            assert row.leq_ok


class TestRemark6Degenerate:
    def test_ratio_rate_equals_offspring_rate_pointwise(self):
        model = build_model(pmf_from_dict({0: 1.0}), G_HALF)
        for x in np.linspace(-0.5, 1.5, 21):
            j = rate_estimator_ratio(model, float(x)).value
            i_f = rate_offspring(model.f, float(x)).value
            j_det = rate_estimator_deterministic(model.f, 1.5, float(x)).value
            if math.isinf(j):
                assert math.isinf(i_f) and math.isinf(j_det)
            else:
                assert x == approx(0.0, abs=1e-12)
                assert j == approx(0.0, abs=1e-12)
                assert i_f == 0.0 and j_det == 0.0


class TestRateInvariants:
    MODEL = build_model(BERN, G_HALF)

    @pytest.mark.parametrize("fn,xs", [
        (lambda x: rate_offspring(BERN, x).value, np.linspace(0.0, 1.0, 21)),
        (lambda x: rate_progeny_closed(BERN, x).value,
         np.linspace(1.0, 6.0, 21)),
        (lambda x: rate_estimator_ratio(
            build_model(BERN, G_HALF), x).value, np.linspace(0.0, 0.95, 20)),
        (lambda x: rate_estimator_deterministic(BERN, 2, x).value,
         np.linspace(0.0, 0.95, 20)),
    ])
    def test_nonnegative_and_midpoint_convex(self, fn, xs):
        vals = [fn(float(x)) for x in xs]
        assert all(v >= 0.0 for v in vals)
        for i in range(len(xs) - 2):
            if all(map(math.isfinite, vals[i:i + 3])):
                mid = fn(float(0.5 * (xs[i] + xs[i + 2])))
                assert mid <= 0.5 * (vals[i] + vals[i + 2]) + 1e-9

    def test_unique_zero_at_mean(self):
        for x in np.linspace(0.05, 0.95, 19):
            v = rate_offspring(BERN, float(x)).value
            if abs(x - 0.5) > 1e-9:
                assert v > 1e-9 * (x - 0.5) ** 2
        assert rate_offspring(BERN, 0.5).value == approx(0.0, abs=1e-9)

    def test_rate_value_is_frozen(self):
        rv = rate_offspring(BERN, 0.25)
        assert isinstance(rv, RateValue)
        with pytest.raises(AttributeError):
            rv.value = 0.0
