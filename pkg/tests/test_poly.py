import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ptfreg.errors import InvalidInputError, ResourceLimitError
from ptfreg.poly import (
    MultilinearPolynomial,
    Restriction,
    TruthTable,
    compress,
    cube_points,
    evaluate,
    evaluate_real,
    fwht_analyze,
    fwht_synthesize,
    index_to_point,
    loads_polynomial,
    dumps_polynomial,
    multiply,
    norms,
    normalize_variance,
    point_to_index,
    random_polynomial,
    restrict,
    vars_to_mask,
)

from conftest import all_points, brute_coefficients, brute_eval, brute_table, polynomials, restrictions

AND2 = MultilinearPolynomial.from_terms(2, [((), -0.5), ((1,), 0.5), ((2,), 0.5), ((1, 2), 0.5)])


class TestEvaluate:
    def test_and2_matches_truth_table(self):
        for x in all_points(2):
            expected = 1.0 if x == (1, 1) else -1.0
            assert evaluate(AND2, x) == expected

    def test_zero_polynomial(self):
        assert evaluate(MultilinearPolynomial.zero(3), (1, -1, 1)) == 0.0

    def test_parity_sign(self):
        assert evaluate(MultilinearPolynomial.character(2, (1, 2)), (-1, 1)) == -1.0

    @pytest.mark.parametrize("x", [(1, 1, 1), (1, 0), (1, 2)])
    def test_bad_points_rejected(self, x):
        with pytest.raises(InvalidInputError):
            evaluate(AND2, x)

    @given(polynomials())
    def test_matches_brute_force(self, p):
        for x in all_points(p.n):
            assert evaluate(p, x) == pytest.approx(brute_eval(p, x), abs=1e-12)

    def test_evaluate_real_agrees_on_cube(self):
        p = random_polynomial(5, 3, 8)
        np.testing.assert_allclose(evaluate_real(p, cube_points(5)), brute_table(p), atol=1e-12)


class TestTransform:
    def test_and2_coefficients(self):
        p = fwht_analyze(TruthTable(2, [1, -1, -1, -1]))
        assert p.allclose(AND2)
        assert p.degree_bound == 2

    def test_constant_and_character(self):
        assert fwht_analyze(TruthTable(3, np.ones(8))).coeffs == {0: 1.0}
        chi1 = TruthTable.from_function(2, lambda x: x[0])
        assert dict(fwht_analyze(chi1).coeffs) == {1: 1.0}

    def test_table_length_checked(self):
        with pytest.raises(InvalidInputError):
            TruthTable(3, np.ones(7))

    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_analyze_matches_direct_averaging(self, n, seed):
        vals = np.random.default_rng(seed).standard_normal(1 << n)
        p = fwht_analyze(TruthTable(n, vals))
        expected = brute_coefficients(vals, n)
        for S in range(1 << n):
            assert p[S] == pytest.approx(expected[S], abs=1e-12)

    @given(polynomials(max_n=8))
    def test_round_trip(self, p):
        back = fwht_analyze(fwht_synthesize(p))
        assert back.allclose(p, atol=1e-12)

    @given(st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_parseval_boolean(self, n, seed):
        vals = np.random.default_rng(seed).choice([-1.0, 1.0], size=1 << n)
        p = fwht_analyze(TruthTable(n, vals))
        assert float(np.sum(p.values ** 2)) == pytest.approx(1.0, abs=1e-12)

    def test_synthesis_limit(self):
        p = MultilinearPolynomial.character(21, (1,))
        with pytest.raises(ResourceLimitError):
            fwht_synthesize(p, limit=20)


class TestRestrict:
    def test_fix_one_variable(self):
        q = restrict(AND2, Restriction(((1, 1),)))
        # AND(1, x2) = x2
        assert q.allclose(MultilinearPolynomial.character(2, (2,)))
        q = restrict(AND2, Restriction(((1, -1),)))
        assert q.allclose(MultilinearPolynomial.constant(2, -1.0))

    def test_empty_restriction_is_identity(self):
        p = random_polynomial(4, 2, 3)
        assert restrict(p, Restriction()) is p

    @given(polynomials(max_n=6), st.data())
    def test_matches_substitution(self, p, data):
        rho = data.draw(restrictions(p.n))
        q = restrict(p, rho)
        assert q.support_mask & rho.mask == 0
        for x in all_points(p.n):
            y = list(x)
            for i, v in rho.fixed:
                y[i - 1] = v
            assert brute_eval(q, x) == pytest.approx(brute_eval(p, y), abs=1e-10)

    def test_restriction_validation(self):
        with pytest.raises(InvalidInputError):
            Restriction(((1, 1), (1, -1)))
        with pytest.raises(InvalidInputError):
            Restriction(((1, 0),))
        with pytest.raises(InvalidInputError):
            restrict(AND2, Restriction(((3, 1),)))


class TestArithmetic:
    @given(polynomials(max_n=6), st.integers(0, 2**32 - 1))
    def test_multiply_pointwise(self, a, seed):
        b = random_polynomial(a.n, 2, seed)
        c = multiply(a, b)
        np.testing.assert_allclose(brute_table(c), brute_table(a) * brute_table(b), atol=1e-9)

    def test_degree_bound_is_enforced(self):
        with pytest.raises(InvalidInputError):
            MultilinearPolynomial(3, 1, {0b011: 1.0})

    def test_absent_mask_reads_zero(self):
        assert MultilinearPolynomial.character(3, (1,))[0b010] == 0.0
        assert MultilinearPolynomial(3, 2, {0b011: 0.0})[0b011] == 0.0
        assert len(MultilinearPolynomial(3, 2, {0b011: 0.0})) == 0

    def test_norms_of_sum(self):
        # E[(x1+x2)^4] = 8 by enumeration
        l2, l4 = norms(MultilinearPolynomial.linear([1, 1]))
        assert l2 == pytest.approx(2 ** 0.5)
        assert l4 == pytest.approx(8 ** 0.25)

    def test_normalize_variance(self):
        p = normalize_variance(random_polynomial(6, 2, 4))
        assert p.variance == pytest.approx(1.0, abs=1e-12)

    def test_compress_reindexes(self):
        p = MultilinearPolynomial.from_terms(5, [((2, 5), 1.5), ((5,), -1.0)])
        q = compress(p, (2, 5))
        assert dict(q.coeffs) == {0b11: 1.5, 0b10: -1.0}
        with pytest.raises(InvalidInputError):
            compress(p, (2,))


class TestPoints:
    @given(st.integers(1, 10), st.data())
    def test_index_point_bijection(self, n, data):
        b = data.draw(st.integers(0, (1 << n) - 1))
        assert point_to_index(index_to_point(b, n)) == b

    def test_index_zero_is_all_ones(self):
        assert tuple(cube_points(3)[0]) == (1, 1, 1)
        assert tuple(cube_points(3)[1]) == (-1, 1, 1)

    def test_vars_to_mask_rejects_repeats(self):
        with pytest.raises(InvalidInputError):
            vars_to_mask((1, 1), 3)


class TestSerialisation:
    @given(polynomials(max_n=8))
    def test_round_trip_exact(self, p):
        q = loads_polynomial(dumps_polynomial(p))
        assert q.n == p.n and q.degree_bound == p.degree_bound
        assert dict(q.coeffs) == dict(p.coeffs)

    @pytest.mark.parametrize("text", ["not json", "[1, 2]", json.dumps({"n": 2}),
                                      json.dumps({"n": 2, "degree": 1, "terms": [[[3], 1.0]]})])
    def test_malformed(self, text):
        with pytest.raises(InvalidInputError):
            loads_polynomial(text)

    def test_random_polynomial_deterministic(self):
        assert dict(random_polynomial(6, 2, 9).coeffs) == dict(random_polynomial(6, 2, 9).coeffs)
