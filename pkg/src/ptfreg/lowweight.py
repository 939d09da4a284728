"""Integer-weight approximators for PTFs.

Regular leaves are rounded to a grid of granularity ``alpha``; the per-leaf
integer polynomials are then glued along the decomposition tree with path
indicator polynomials into a single integer polynomial ``Q``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Optional

import numpy as np

from .constants import TheoryConstants
from .errors import InternalError, InvalidInputError
from .influence import is_tau_regular
from .poly import (
    MultilinearPolynomial,
    Restriction,
    _check_enumerable,
    fwht,
    mask_to_vars,
    normalize_variance,
    table_values,
)
from .tree import DecompositionTree, Leaf, LeafKind, build_tree, path_mass

UNIT_VARIANCE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class IntegerPolynomial:
    """Multilinear polynomial with exact (arbitrary precision) integer coefficients."""

    n: int
    degree_bound: int
    coeffs: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for mask, c in self.coeffs.items():
            if isinstance(c, float) or not isinstance(c, (int, np.integer)):
                raise InvalidInputError(f"coefficient {c!r} is not an integer")
            mask, c = int(mask), int(c)
            if not 0 <= mask < (1 << self.n):
                raise InvalidInputError(f"mask {mask} out of range for n = {self.n}")
            if mask.bit_count() > self.degree_bound:
                raise InvalidInputError("monomial exceeds degree bound")
            if c:
                clean[mask] = c
        object.__setattr__(self, "coeffs", MappingProxyType(dict(sorted(clean.items()))))

    @classmethod
    def constant(cls, n: int, value: int) -> "IntegerPolynomial":
        return cls(n, 0, {0: int(value)})

    @property
    def weight(self) -> int:
        return weight_of(self)

    @property
    def degree(self) -> int:
        return max((m.bit_count() for m in self.coeffs), default=0)

    @property
    def support_mask(self) -> int:
        out = 0
        for m in self.coeffs:
            out |= m
        return out

    def __getitem__(self, mask: int) -> int:
        return self.coeffs.get(int(mask), 0)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __add__(self, other: "IntegerPolynomial") -> "IntegerPolynomial":
        acc = dict(self.coeffs)
        for m, c in other.coeffs.items():
            acc[m] = acc.get(m, 0) + c
        return IntegerPolynomial(self.n, max(self.degree_bound, other.degree_bound), acc)

    def __sub__(self, other: "IntegerPolynomial") -> "IntegerPolynomial":
        return self + other.scale(-1)

    def scale(self, k: int) -> "IntegerPolynomial":
        return IntegerPolynomial(self.n, self.degree_bound, {m: c * k for m, c in self.coeffs.items()})

    def __mul__(self, other: "IntegerPolynomial") -> "IntegerPolynomial":
        acc: dict[int, int] = {}
        for ma, ca in self.coeffs.items():
            for mb, cb in other.coeffs.items():
                m = ma ^ mb
                acc[m] = acc.get(m, 0) + ca * cb
        return IntegerPolynomial(self.n, min(self.n, self.degree_bound + other.degree_bound), acc)

    def table(self, limit: Optional[int] = None) -> np.ndarray:
        """Exact values at all ``2^n`` points (object array of Python ints)."""
        _check_enumerable(self.n, limit)
        dense = np.zeros(1 << self.n, dtype=object)
        for m, c in self.coeffs.items():
            dense[m] = c
        return fwht(dense)

    def evaluate(self, x) -> int:
        b = sum(1 << i for i, xi in enumerate(x) if xi == -1)
        return sum(c if (m & b).bit_count() % 2 == 0 else -c for m, c in self.coeffs.items())

    def to_float(self) -> MultilinearPolynomial:
        return MultilinearPolynomial(self.n, self.degree_bound,
                                     {m: float(c) for m, c in self.coeffs.items()})

    def to_dict(self) -> dict:
        terms = sorted(((mask_to_vars(m), c) for m, c in self.coeffs.items()),
                       key=lambda t: (len(t[0]), t[0]))
        return {"n": self.n, "degree": self.degree_bound, "weight": self.weight,
                "terms": [[list(v), c] for v, c in terms]}


def weight_of(q: IntegerPolynomial) -> int:
    """Sum of squared coefficients."""
    return sum(c * c for c in q.coeffs.values())


def _sign_int(values) -> np.ndarray:
    return np.array([1 if v >= 0 else -1 for v in values], dtype=np.int8)


def integerize_constant(q: IntegerPolynomial, c: float, alpha: float,
                        limit: Optional[int] = None) -> tuple[int, int]:
    """Integer constant ``m`` with ``sign(alpha*q + m*alpha) == sign(alpha*q + c)`` everywhere.

    ``q`` holds the integer non-constant coefficients (its constant term is
    ignored). Tries ``ceil(c/alpha)`` then ``floor(c/alpha)``. Returns
    ``(m, factor)``; ``factor == 2`` signals the fallback in which every
    coefficient of ``q`` must be doubled and ``m`` is odd, making all values odd.
    """
    if not alpha > 0:
        raise InvalidInputError("alpha must be positive")
    nonconst = IntegerPolynomial(q.n, q.degree_bound, {m: v for m, v in q.coeffs.items() if m})
    v = nonconst.table(limit)
    shifted = c / alpha
    target = np.array([1 if float(x) + shifted >= 0 else -1 for x in v], dtype=np.int8)
    for m in (math.ceil(shifted), math.floor(shifted)):
        if np.array_equal(_sign_int(v + m), target):
            return int(m), 1
    m, factor = _odd_fallback(shifted)
    if not np.array_equal(_sign_int(factor * v + m), target):
        raise InternalError("constant integerisation failed after the odd-constant fallback")
    return m, factor


def _odd_fallback(shifted: float) -> tuple[int, int]:
    # 2*floor(c) + 1 has the sign of v + c for every integer v once v is doubled
    return 2 * math.floor(shifted) + 1, 2


@dataclass(frozen=True, eq=False)
class RoundingResult:
    poly: IntegerPolynomial
    alpha: Optional[float]
    tau: float
    dominant_constant: bool
    constant_factor: int
    regular: bool


def round_regular_detailed(p: MultilinearPolynomial, eps: float,
                           constants: TheoryConstants | None = None, *,
                           degree: Optional[int] = None, strict: bool = True) -> RoundingResult:
    """Round a unit-variance, regular polynomial onto the integer lattice.

    Non-constant coefficients go to the nearest multiple of
    ``alpha = tau / (K n ln(4/eps))^(d/2)`` (stored divided by ``alpha``), with
    ``tau = (theta * eps / d)^(8d)``. A constant term dominating
    ``(theta ln(1/eps))^(d/2)`` yields the constant PTF instead. With
    ``strict=False`` the regularity precondition is reported, not enforced.
    """
    constants = constants or TheoryConstants()
    if not 0 < eps < 1:
        raise InvalidInputError(f"eps must lie in (0, 1), got {eps}")
    d = degree if degree is not None else max(p.degree, 1)
    tau = (constants.theta * eps / d) ** (8 * d)
    if abs(p.variance - 1.0) > UNIT_VARIANCE_TOL:
        raise InvalidInputError(f"polynomial must have unit variance, got {p.variance}")
    regular = tau >= 1 or is_tau_regular(p, tau)
    if strict and not regular:
        raise InvalidInputError(f"polynomial is not tau-regular at tau = {tau:.3g}")
    c = p.constant_term
    if abs(c) > (constants.theta * math.log(1.0 / eps)) ** (d / 2.0):
        q = IntegerPolynomial.constant(p.n, 1 if c >= 0 else -1)
        return RoundingResult(q, None, tau, True, 1, regular)
    alpha = tau / (constants.k_granularity * p.n * math.log(4.0 / eps)) ** (d / 2.0)
    ints = {m: math.floor(v / alpha + 0.5) for m, v in p.coeffs.items() if m}
    nonconst = IntegerPolynomial(p.n, p.degree_bound, ints)
    m0, factor = integerize_constant(nonconst, c, alpha, constants.enumeration_limit)
    coeffs = {m: factor * v for m, v in ints.items()}
    coeffs[0] = m0
    return RoundingResult(IntegerPolynomial(p.n, p.degree_bound, coeffs), alpha, tau, False,
                          factor, regular)


def round_regular(p: MultilinearPolynomial, eps: float, constants: TheoryConstants | None = None,
                  **kwargs) -> IntegerPolynomial:
    return round_regular_detailed(p, eps, constants, **kwargs).poly


def indicator_poly(rho: Restriction, n: int) -> IntegerPolynomial:
    """Expansion of ``prod_{(i, v) in rho} (1 + v x_i)``: ``2^|rho|`` on matching points, else 0."""
    rho.check(n)
    coeffs = {0: 1}
    for i, v in rho.fixed:
        bit = 1 << (i - 1)
        nxt = dict(coeffs)
        for m, c in coeffs.items():
            nxt[m | bit] = c * v
        coeffs = nxt
    return IntegerPolynomial(n, len(rho), coeffs)


def _check_leaf_approximator(leaf: Leaf, q: IntegerPolynomial) -> None:
    if q.support_mask & leaf.restriction.mask:
        raise InvalidInputError(
            f"approximator at leaf {leaf.restriction.to_list()} uses a variable fixed on its path")


def combine_tree(tree: DecompositionTree,
                 leaf_approximators: Mapping[Restriction, IntegerPolynomial]) -> IntegerPolynomial:
    """``Q = sum_rho P_rho * q_rho`` over the leaves of ``tree``.

    Expanded bottom-up: at a node on ``x_i``,
    ``Q = (Q_plus + Q_minus) + x_i (Q_plus - Q_minus)``.
    """
    n = tree.n

    def expand(item) -> IntegerPolynomial:
        if isinstance(item, Leaf):
            try:
                q = leaf_approximators[item.restriction]
            except KeyError as exc:
                raise InvalidInputError(f"no approximator for leaf {item.restriction.to_list()}") from exc
            _check_leaf_approximator(item, q)
            return q
        plus, minus = expand(item.plus), expand(item.minus)
        bit = 1 << (item.variable - 1)
        acc = dict((plus + minus).coeffs)
        for m, c in (plus - minus).coeffs.items():
            acc[m | bit] = acc.get(m | bit, 0) + c
        return IntegerPolynomial(n, min(n, max(plus.degree_bound, minus.degree_bound) + 1), acc)

    return expand(tree.root)


def combine_tree_direct(tree: DecompositionTree,
                        leaf_approximators: Mapping[Restriction, IntegerPolynomial]) -> IntegerPolynomial:
    """Same sum as :func:`combine_tree`, computed leaf by leaf with explicit indicator products."""
    total = IntegerPolynomial(tree.n, 0, {})
    for leaf in tree.leaves():
        q = leaf_approximators[leaf.restriction]
        _check_leaf_approximator(leaf, q)
        total = total + indicator_poly(leaf.restriction, tree.n) * q
    return total


@dataclass(frozen=True, eq=False)
class ApproximationCertificate:
    target: MultilinearPolynomial
    approximator: IntegerPolynomial
    distance: float
    eps: float
    tau: float
    weight: int
    weight_bound: float
    degree: int
    method: str
    tree_depth: int
    bad_mass: float
    leaf_counts: dict
    leaf_masses: dict
    constants: TheoryConstants
    tree: DecompositionTree = field(repr=False)
    leaf_approximators: Mapping[Restriction, IntegerPolynomial] = field(repr=False)

    @property
    def bad_within_allowance(self) -> bool:
        return self.bad_mass <= self.tau

    @property
    def certified(self) -> bool:
        return self.distance <= self.eps

    @property
    def violation(self) -> bool:
        """Distance above ``eps`` although the bad mass stayed within ``tau``."""
        return self.bad_within_allowance and not self.certified

    def to_dict(self) -> dict:
        return {
            "target": self.target.to_dict(),
            "approximator": self.approximator.to_dict(),
            "distance": self.distance,
            "eps": self.eps,
            "tau": self.tau,
            "weight": self.weight,
            "log2_weight": math.log2(self.weight) if self.weight else None,
            "weight_bound": self.weight_bound,
            "within_weight_bound": self.weight <= self.weight_bound,
            "degree": self.degree,
            "method": self.method,
            "tree_depth": self.tree_depth,
            "bad_mass": self.bad_mass,
            "leaf_counts": self.leaf_counts,
            "leaf_masses": self.leaf_masses,
            "certified": self.certified,
            "constants": self.constants.to_dict(),
        }


def leaf_approximators(tree: DecompositionTree, eps: float, constants: TheoryConstants,
                       degree: int) -> dict[Restriction, IntegerPolynomial]:
    """Integer polynomial for every leaf: rounded for regular leaves, +-1 for
    near-constant leaves, the constant 1 for bad leaves."""
    out = {}
    for leaf in tree.leaves():
        if leaf.kind is LeafKind.REGULAR:
            q = round_regular(normalize_variance(leaf.poly), eps, constants, degree=degree)
        elif leaf.kind is LeafKind.CLOSE_TO_CONSTANT:
            q = IntegerPolynomial.constant(tree.n, leaf.leaf_class.sign)
        else:
            q = IntegerPolynomial.constant(tree.n, 1)
        out[leaf.restriction] = q
    return out


def approximate(p: MultilinearPolynomial, eps: float,
                constants: TheoryConstants | None = None) -> ApproximationCertificate:
    """Build an integer polynomial ``Q`` whose sign approximates ``sign(p)``.

    The tree is grown at ``tau = (theta * (eps/2) / d)^(8d)``; regular leaves are
    rounded at accuracy ``eps/2``. The distance is measured exactly.
    """
    constants = constants or TheoryConstants()
    if not 0 < eps < 1:
        raise InvalidInputError(f"eps must lie in (0, 1), got {eps}")
    if not p.variance > 0:
        raise InvalidInputError("target polynomial must be non-constant")
    _check_enumerable(p.n, constants.enumeration_limit)
    d = max(p.degree, 1)
    tau = (constants.theta * (eps / 2.0) / d) ** (8 * d)
    if not tau < 0.5:
        raise InvalidInputError(f"theta = {constants.theta} gives tau = {tau:.3g} >= 1/2")
    tree = build_tree(p, tau, constants, degree=d)
    approx = leaf_approximators(tree, eps / 2.0, constants, d)
    Q = combine_tree(tree, approx)
    f = table_values(p, constants.enumeration_limit) >= 0
    g = np.array([v >= 0 for v in Q.table(constants.enumeration_limit)])
    distance = float(np.mean(f != g))
    report = path_mass(tree)
    depth = tree.depth
    weight = Q.weight
    bound = 2.0 ** (4 * depth) * p.n ** d * (d / eps) ** (constants.weight_exponent * d)
    return ApproximationCertificate(
        target=p, approximator=Q, distance=distance, eps=eps, tau=tau, weight=weight,
        weight_bound=bound, degree=Q.degree, method="exact", tree_depth=depth,
        bad_mass=report.masses[LeafKind.BAD.value], leaf_counts=report.counts,
        leaf_masses=report.masses, constants=constants, tree=tree, leaf_approximators=approx)
