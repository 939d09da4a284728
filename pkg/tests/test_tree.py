import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ptfreg.constants import TheoryConstants
from ptfreg.errors import InvalidInputError, ResourceLimitError
from ptfreg.influence import is_tau_regular
from ptfreg.poly import MultilinearPolynomial, Restriction, normalize_variance, random_polynomial, restrict
from ptfreg.tree import (
    DecompositionTree,
    Leaf,
    LeafClass,
    LeafKind,
    Node,
    build_tree,
    derive_parameters,
    good_restriction_census,
    path_mass,
)

from conftest import all_points, brute_eval, brute_table, maj3


class TestParameters:
    def test_linear_root_residual(self):
        prm = derive_parameters(1, 0.1)
        t = prm.tau_tilde
        assert abs(t * 3.0 * 1.0 * math.log(1 / t) - 0.1) < 1e-9

    @pytest.mark.parametrize("d", [1, 2, 3, 5])
    def test_residual_any_degree(self, d):
        prm = derive_parameters(d, 0.05)
        t = prm.tau_tilde
        scale = 3.0 * d * max(math.log(d), 1.0)
        assert t * (scale * math.log(1 / t)) ** d == pytest.approx(0.05, rel=1e-9)
        assert t <= math.exp(-d)

    def test_monotone_in_tau(self):
        a, b = derive_parameters(2, 0.05), derive_parameters(2, 0.2)
        assert a.tau_tilde < b.tau_tilde
        assert a.depth_budget > b.depth_budget

    def test_override(self):
        prm = derive_parameters(2, 0.1, TheoryConstants(depth_budget_override=8))
        assert prm.depth_budget == 8

    def test_caps(self):
        prm = derive_parameters(2, 0.1)
        assert prm.beta == prm.tau_tilde_prime == 0.1
        assert prm.stage_cap == math.ceil(2 * 81 * math.log(10))
        assert prm.stage_depth_cap == math.ceil(prm.alpha / prm.tau_tilde)

    @pytest.mark.parametrize("tau", [0.0, 0.5, 0.7])
    def test_tau_range(self, tau):
        with pytest.raises(InvalidInputError):
            derive_parameters(2, tau)


class TestExamples:
    def test_regular_input_single_leaf(self):
        t = build_tree(maj3(), 0.5)
        leaves = list(t.leaves())
        assert len(leaves) == 1 and leaves[0].kind is LeafKind.REGULAR

    def test_parity_above_half(self):
        t = build_tree(MultilinearPolynomial.character(2, (1, 2)), 0.6)
        assert [leaf.kind for leaf in t.leaves()] == [LeafKind.REGULAR]

    def test_dictator(self):
        t = build_tree(MultilinearPolynomial.character(3, (1,)), 0.1)
        assert isinstance(t.root, Node) and t.root.variable == 1
        leaves = list(t.leaves())
        assert len(leaves) == 2
        assert all(leaf.kind is LeafKind.CLOSE_TO_CONSTANT and leaf.leaf_class.distance == 0
                   for leaf in leaves)
        assert path_mass(t).masses == {"regular": 0.0, "close_to_constant": 1.0, "bad": 0.0}

    def test_constant_input(self):
        t = build_tree(MultilinearPolynomial.constant(4, -2.0), 0.1)
        assert t.root.kind is LeafKind.CLOSE_TO_CONSTANT and t.root.leaf_class.sign == -1

    def test_forced_exhaustion(self):
        p = random_polynomial(6, 2, 1)
        t = build_tree(p, 0.1, TheoryConstants(depth_budget_override=0))
        rep = path_mass(t)
        assert rep.good_mass == 0.0 and rep.exhausted and t.exhausted

    def test_root_is_a_leaf_from_half_up(self):
        # no sign function is farther than 1/2 from a constant
        t = build_tree(MultilinearPolynomial.character(3, (1,)), 0.6)
        assert t.params is None
        assert t.root.kind is LeafKind.CLOSE_TO_CONSTANT and t.root.leaf_class.distance == 0.5

    def test_size_limit(self):
        p = MultilinearPolynomial.linear([1.0] * 8)
        with pytest.raises(ResourceLimitError):
            build_tree(p, 0.05, TheoryConstants(enumeration_limit=6))


def _check_tree(p, tree, tau):
    for leaf in tree.leaves():
        if leaf.kind is LeafKind.REGULAR:
            assert is_tau_regular(leaf.poly, tau)
        elif leaf.kind is LeafKind.CLOSE_TO_CONSTANT:
            vals = brute_table(leaf.poly)
            rows = leaf.restriction.consistent_indices(p.n)
            signs = np.where(vals[rows] >= 0, 1, -1)
            assert float(np.mean(signs != leaf.leaf_class.sign)) <= tau + 1e-12
        assert leaf.poly.support_mask & leaf.restriction.mask == 0
    for x in all_points(p.n):
        leaf = tree.route(x)
        assert leaf.restriction.matches(x)
        assert (brute_eval(leaf.poly, x) >= 0) == (brute_eval(p, x) >= 0)


@given(st.integers(2, 7), st.integers(1, 3), st.integers(0, 2**32 - 1),
       st.sampled_from([0.05, 0.1, 0.3]))
def test_labels_and_equivalence(n, d, seed, tau):
    p = random_polynomial(n, min(d, n), seed)
    tree = build_tree(p, tau)
    _check_tree(p, tree, tau)
    rep = path_mass(tree)
    assert sum(rep.masses.values()) == pytest.approx(1.0, abs=1e-9)
    if not rep.exhausted:
        assert rep.good_mass >= 1 - tau


def test_deterministic():
    p = random_polynomial(8, 2, 5)
    assert build_tree(p, 0.1).to_dict() == build_tree(p, 0.1).to_dict()


def test_leaf_index_table_partitions_cube():
    p = random_polynomial(7, 2, 3)
    tree = build_tree(p, 0.1)
    leaves, owner = tree.leaf_index_table()
    assert np.all(owner >= 0)
    counts = np.bincount(owner, minlength=len(leaves))
    assert list(counts) == [1 << (p.n - leaf.depth) for leaf in leaves]


class TestPathMass:
    def test_single_leaf(self):
        assert path_mass(build_tree(maj3(), 0.5)).good_mass == 1.0

    def test_one_bad_child(self):
        p = MultilinearPolynomial.character(1, (1,))
        good = Leaf(Restriction(((1, 1),)), p, LeafClass(LeafKind.CLOSE_TO_CONSTANT, 1, 0.0))
        bad = Leaf(Restriction(((1, -1),)), p, LeafClass(LeafKind.BAD))
        tree = DecompositionTree(Node(1, Restriction(), bad, good), None, TheoryConstants(), 1)
        rep = path_mass(tree)
        assert rep.good_mass == 0.5 and rep.counts["bad"] == 1 and rep.max_depth == 1


class TestCensus:
    def test_dictator(self):
        rep = good_restriction_census(MultilinearPolynomial.character(3, (1,)), 1, 0.1)
        assert rep.good.all()
        assert np.all(rep.distances == 0)

    def test_parity_head_is_empty(self):
        rep = good_restriction_census(MultilinearPolynomial.character(3, (1, 2)), 1, 0.1)
        assert rep.good_fraction == 0.0 and not rep.cond_i.any()

    def test_limits(self):
        p = random_polynomial(4, 2, 0)
        with pytest.raises(InvalidInputError):
            good_restriction_census(p, 5, 0.1)
        with pytest.raises(ResourceLimitError):
            good_restriction_census(MultilinearPolynomial.linear([1.0] * 21), 21, 0.1)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.sampled_from([0.05, 0.1, 0.2]))
    def test_good_means_close(self, seed, K, beta):
        d = 2
        conservative = beta ** (-1 / d) / math.log(1 / beta)
        constants = TheoryConstants(theta_dfn2=max(1.0, conservative))
        p = random_polynomial(9, d, seed)
        rep = good_restriction_census(p, K, beta, constants)
        assert rep.good_close(beta)

    def test_tail_norms_by_brute_force(self):
        p = random_polynomial(6, 2, 11)
        rep = good_restriction_census(p, 2, 0.1)
        q = normalize_variance(p)
        for r in range(4):
            rho = Restriction(tuple((v, -1 if (r >> j) & 1 else 1) for j, v in enumerate(rep.head)))
            sub = restrict(q, rho)
            assert rep.head_values[r] == pytest.approx(sub.constant_term, abs=1e-12)
            assert rep.tail_norms[r] == pytest.approx(math.sqrt(sub.variance), abs=1e-12)
