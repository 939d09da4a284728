import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import norm

from ptfreg.checks import (
    anticoncentration_check,
    concentration_profile,
    concentration_tail,
    dist,
    ensemble_experiment,
    gaussian_invariance_gap,
    hypercontractivity_check,
    minimal_passing_c0,
    regular_anticoncentration,
    sample_from_D,
    sup_cdf_gap,
)
from ptfreg.constants import TheoryConstants
from ptfreg.errors import InvalidInputError, ResourceLimitError
from ptfreg.poly import MultilinearPolynomial, multiply, random_polynomial

from conftest import brute_sign_distance, brute_table, maj3, majority9, polynomials

X1 = MultilinearPolynomial.character(1, (1,))


class TestDist:
    def test_examples(self):
        x1 = MultilinearPolynomial.character(3, (1,))
        assert dist(x1, x1) == 0.0
        assert dist(maj3(), x1) == 0.25
        assert dist(x1, -x1) == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            dist(X1, maj3())

    @given(st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_metric(self, n, seed):
        f, g, h = (random_polynomial(n, 2, [seed, i]) for i in range(3))
        assert dist(f, g) == dist(g, f) == brute_sign_distance(f, g)
        assert dist(f, h) <= dist(f, g) + dist(g, h) + 1e-15

    def test_monte_carlo_branch(self):
        f = random_polynomial(6, 2, 1)
        g = random_polynomial(6, 2, 2)
        constants = TheoryConstants(enumeration_limit=4, mc_samples=40_000)
        assert dist(f, g, constants, seed=3) == pytest.approx(dist(f, g), abs=0.02)


class TestHypercontractivity:
    def test_examples(self):
        rep = hypercontractivity_check(MultilinearPolynomial.character(2, (1, 2)))
        assert rep.status == "pass" and rep.measured == pytest.approx(1.0) and rep.bound == pytest.approx(3.0)
        rep = hypercontractivity_check(MultilinearPolynomial.linear([1, 1]))
        assert rep.measured == pytest.approx(8 ** 0.25)
        assert rep.bound == pytest.approx(math.sqrt(3) * math.sqrt(2))

    @given(polynomials(max_n=8, max_d=3))
    def test_never_fails(self, p):
        rep = hypercontractivity_check(p)
        assert rep.status == "pass"
        assert "samples" not in rep.to_dict()


class TestConcentration:
    def test_dictator_has_no_tail(self):
        rep = concentration_tail(X1, 3.0)
        assert rep.measured == 0.0 and rep.status == "info"

    def test_threshold_enforced(self):
        with pytest.raises(InvalidInputError):
            concentration_tail(X1, 2.0)

    def test_majority9_monotone(self):
        grid = [math.e + 0.1, 4.0, 8.0]
        rep = concentration_profile(majority9(), grid)
        assert rep.status == "pass"
        vals = np.abs(brute_table(majority9()))
        assert rep.details["tails"] == [float(np.mean(vals >= t)) for t in grid]


class TestAnticoncentration:
    def test_examples(self):
        rep = anticoncentration_check(X1)
        assert rep.measured == 0.5 and rep.bound == pytest.approx(1 / 3) and rep.status == "pass"
        rep = anticoncentration_check(MultilinearPolynomial.character(2, (1, 2)))
        assert rep.measured == 0.5 and rep.bound == pytest.approx(1 / 9)

    def test_nonzero_mean(self):
        with pytest.raises(InvalidInputError):
            anticoncentration_check(maj3() + MultilinearPolynomial.constant(3, 0.1))

    @given(st.integers(2, 8), st.integers(1, 3), st.integers(0, 2**32 - 1))
    def test_minimal_c0_is_tight(self, n, d, seed):
        p = random_polynomial(n, min(d, n), seed, include_constant=False)
        c0 = minimal_passing_c0(p)
        deg = max(p.degree, 1)
        vals = brute_table(p)
        l2 = math.sqrt(float(np.sum(p.values ** 2)))
        assert np.mean(vals > c0 ** -deg * l2) > c0 ** -deg
        if c0 > 1.0:
            lower = c0 - 1e-5
            assert not np.mean(vals > lower ** -deg * l2) > lower ** -deg

    def test_failure_reports_minimal_c0(self):
        p = random_polynomial(6, 3, 4, include_constant=False)
        rep = anticoncentration_check(p, TheoryConstants(c0=1.01))
        if rep.status == "fail":
            assert rep.details["minimal_c0"] > 1.01


class TestRegularAnticoncentration:
    def test_majority9_at_one_ninth(self):
        rep = regular_anticoncentration(majority9(), 1 / 9)
        assert rep.measured == 0.0 and rep.details["precondition_met"]

    def test_majority9_at_tenth_needs_relaxed_mode(self):
        with pytest.raises(InvalidInputError):
            regular_anticoncentration(majority9(), 0.1)
        rep = regular_anticoncentration(majority9(), 0.1, strict=False)
        assert rep.measured == 0.0 and not rep.details["precondition_met"]

    def test_parity(self):
        parity = MultilinearPolynomial.character(2, (1, 2))
        assert regular_anticoncentration(parity, 0.5).measured == 0.0

    def test_unit_variance(self):
        with pytest.raises(InvalidInputError):
            regular_anticoncentration(MultilinearPolynomial.linear([1, 1]), 0.5)


class TestInvariance:
    def test_dictator_gap(self):
        rep = gaussian_invariance_gap(X1, 100_000, seed=1)
        exact = 0.5 - norm.cdf(-1.0)
        assert abs(rep.measured - exact) <= rep.details["dkw_band"]
        assert rep.samples == 100_000 and rep.seed == 1

    def test_majority9_small(self):
        rep = gaussian_invariance_gap(majority9(), 100_000, seed=2)
        assert rep.measured < 0.2

    def test_self_gap_zero(self):
        vals = brute_table(majority9())
        assert sup_cdf_gap(vals, vals) == 0.0

    def test_sup_gap_two_point(self):
        # steps at 0 and 1 versus a single step at 1
        assert sup_cdf_gap(np.array([0.0, 1.0]), np.array([1.0, 1.0])) == 0.5

    def test_doubled_run_inside_band(self):
        p = majority9()
        a = gaussian_invariance_gap(p, 20_000, seed=5)
        b = gaussian_invariance_gap(p, 40_000, seed=6)
        assert abs(a.measured - b.measured) <= a.details["dkw_band"] + b.details["dkw_band"]

    def test_deterministic(self):
        p = majority9()
        assert gaussian_invariance_gap(p, 5000, seed=9).to_dict() == \
            gaussian_invariance_gap(p, 5000, seed=9).to_dict()


class TestEnsemble:
    def test_sample_shape(self):
        p = sample_from_D(4, 2, 0)
        assert len(p) == 6 and set(np.abs(p.values)) == {1.0}
        assert all(m.bit_count() == 2 for m in p.coeffs)
        assert dict(p.coeffs) == dict(sample_from_D(4, 2, 0).coeffs)
        assert len(sample_from_D(5, 5, 3)) == 1

    def test_identical_and_independent_pairs(self):
        a = MultilinearPolynomial.character(4, (1, 2))
        b = MultilinearPolynomial.character(4, (3, 4))
        c = multiply(a, a)
        assert c.constant_term == 1.0 and c.variance == 0.0
        c = multiply(a, b)
        assert c.constant_term == 0.0 and c.variance == 1.0
        assert dist(a, b) == 0.5

    def test_matrix_properties(self):
        res = ensemble_experiment(8, 8, 2, seed=3)
        D = res.distances
        assert np.array_equal(D, D.T) and np.all(np.diag(D) == 0)
        assert np.all((D >= 0) & (D <= 1))
        assert res.consistent
        for i in range(3):
            for j in range(3):
                assert D[i, j] == brute_sign_distance(res.polys[i], res.polys[j])

    def test_single_member(self):
        res = ensemble_experiment(1, 4, 2)
        assert res.min_distance is None
        assert res.to_dict()["threshold_fractions"]["both"] is None

    def test_odd_n_flag(self):
        res = ensemble_experiment(3, 7, 2)
        assert res.odd_n and res.half_n == 3
        assert res.variance_threshold == pytest.approx(math.comb(3, 2) ** 2 / 12)

    def test_limits(self):
        with pytest.raises(ResourceLimitError):
            ensemble_experiment(2, 25, 2)
