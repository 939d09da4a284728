"""Decision-tree decomposition of a PTF into regular or near-constant leaves.

The tree is grown greedily: at every node the restricted polynomial is
classified (regular, close to a constant, or neither); unclassified nodes
branch on the most influential variables of the current stage, where a stage
restricts the first ``min(l, alpha / tau_tilde)`` variables in influence order
and ``l`` is the ``tau_tilde``-critical index at the stage root.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

import numpy as np

from .constants import TheoryConstants
from .errors import InvalidInputError, ResourceLimitError
from .influence import InfluenceProfile, critical_index, influence_profile, is_tau_regular
from .poly import (
    MultilinearPolynomial,
    Restriction,
    compress,
    fwht,
    normalize_variance,
    restrict,
    sign,
    table_values,
)

BISECTION_RTOL = 1e-12


@dataclass(frozen=True)
class TreeParams:
    tau: float
    d: int
    beta: float
    tau_tilde: float
    tau_tilde_prime: float
    alpha: float
    stage_depth_cap: int
    stage_cap: int
    depth_budget: int
    depth_bound: float
    within_depth_bound: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _log_tau_prime(log_t: float, d: int, scale: float) -> float:
    """log of ``t * (scale * ln(1/t))^d`` given ``log t``."""
    return log_t + d * math.log(scale * -log_t)


def derive_parameters(d: int, tau: float, constants: TheoryConstants | None = None) -> TreeParams:
    """Stage and depth parameters for growing a tree at regularity ``tau``.

    ``tau_tilde`` is the root of ``t * (C' d max(ln d, 1) ln(1/t))^d = tau``,
    found by bisection in log space on the interval where the left side is
    increasing.
    """
    constants = constants or TheoryConstants()
    if not 0 < tau < 0.5:
        raise InvalidInputError(f"tau must lie in (0, 1/2), got {tau}")
    if int(d) != d or d < 1:
        raise InvalidInputError(f"degree must be a positive integer, got {d}")
    d = int(d)
    beta = tau
    scale = constants.c_prime * d * max(math.log(d), 1.0)
    target = math.log(tau)
    # t * (scale ln 1/t)^d increases on (0, e^-d]
    hi = min(math.log(tau), -float(d))
    lo = hi
    while _log_tau_prime(lo, d, scale) >= target:
        lo *= 2.0
    # width in log space bounds the relative error of tau_tilde
    while hi - lo > BISECTION_RTOL:
        mid = 0.5 * (lo + hi)
        if _log_tau_prime(mid, d, scale) < target:
            lo = mid
        else:
            hi = mid
    tau_tilde = math.exp(0.5 * (lo + hi))

    alpha = constants.alpha_mult * (d * math.log(math.log(1.0 / beta)) + d * math.log(d) + d)
    stage_depth_cap = max(1, math.ceil(alpha / tau_tilde))
    stage_cap = max(1, math.ceil(2.0 * constants.c ** d * math.log(1.0 / tau)))
    if constants.depth_budget_override is not None:
        budget = int(constants.depth_budget_override)
    else:
        budget = stage_depth_cap * stage_cap
    depth_bound = (1.0 / tau) * (d * math.log(1.0 / tau)) ** (constants.depth_exponent * d)
    return TreeParams(tau=tau, d=d, beta=beta, tau_tilde=tau_tilde, tau_tilde_prime=tau,
                      alpha=alpha, stage_depth_cap=stage_depth_cap, stage_cap=stage_cap,
                      depth_budget=budget, depth_bound=depth_bound,
                      within_depth_bound=budget <= depth_bound)


class LeafKind(str, enum.Enum):
    REGULAR = "regular"
    CLOSE_TO_CONSTANT = "close_to_constant"
    BAD = "bad"


@dataclass(frozen=True)
class LeafClass:
    kind: LeafKind
    sign: Optional[int] = None
    distance: Optional[float] = None
    evidence: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "sign": self.sign, "distance": self.distance,
                "evidence": self.evidence}


@dataclass(frozen=True, eq=False)
class Leaf:
    restriction: Restriction
    poly: MultilinearPolynomial
    leaf_class: LeafClass

    @property
    def depth(self) -> int:
        return len(self.restriction)

    @property
    def kind(self) -> LeafKind:
        return self.leaf_class.kind


@dataclass(frozen=True, eq=False)
class Node:
    variable: int
    restriction: Restriction
    minus: "TreeItem"
    plus: "TreeItem"

    def child(self, value: int) -> "TreeItem":
        return self.plus if value == 1 else self.minus


TreeItem = Union[Node, Leaf]


@dataclass(frozen=True, eq=False)
class DecompositionTree:
    root: TreeItem
    params: Optional[TreeParams]
    constants: TheoryConstants
    n: int

    def leaves(self) -> Iterator[Leaf]:
        stack = [self.root]
        while stack:
            item = stack.pop()
            if isinstance(item, Leaf):
                yield item
            else:
                stack.append(item.plus)
                stack.append(item.minus)

    def nodes(self) -> Iterator[Node]:
        stack = [self.root]
        while stack:
            item = stack.pop()
            if isinstance(item, Node):
                yield item
                stack.append(item.plus)
                stack.append(item.minus)

    @property
    def depth(self) -> int:
        return max(leaf.depth for leaf in self.leaves())

    @property
    def exhausted(self) -> bool:
        return any(leaf.kind is LeafKind.BAD for leaf in self.leaves())

    def route(self, x) -> Leaf:
        """Follow the path selected by point ``x`` down to its leaf."""
        item = self.root
        while isinstance(item, Node):
            item = item.child(int(x[item.variable - 1]))
        return item

    def leaf_index_table(self) -> tuple[list[Leaf], np.ndarray]:
        """All leaves and, for each of the ``2^n`` table indices, the index of the leaf reached."""
        leaves = list(self.leaves())
        owner = np.full(1 << self.n, -1, dtype=np.int64)
        idx = np.arange(1 << self.n, dtype=np.int64)
        for k, leaf in enumerate(leaves):
            rho = leaf.restriction
            owner[(idx & rho.mask) == rho.negative_mask] = k
        return leaves, owner

    def to_dict(self, inline_polys: bool = True) -> dict:
        def enc(item):
            if isinstance(item, Leaf):
                out = {"leaf": item.leaf_class.to_dict(), "restriction": item.restriction.to_list()}
                if inline_polys:
                    out["poly"] = item.poly.to_dict()
                return out
            return {"variable": item.variable, "minus": enc(item.minus), "plus": enc(item.plus)}
        return {"n": self.n,
                "params": self.params.to_dict() if self.params else None,
                "constants": self.constants.to_dict(),
                "root": enc(self.root)}


def distance_to_constant(q: MultilinearPolynomial, constants: TheoryConstants,
                         seed=0) -> tuple[float, int, str]:
    """Distance from ``sign(q)`` to the nearest constant, that constant, and the method.

    Exact over the relevant variables when they fit the enumeration limit,
    otherwise Monte Carlo with ``constants.mc_samples`` points.
    """
    rel = q.relevant_variables()
    if not rel:
        return 0.0, 1 if q.constant_term >= 0 else -1, "exact"
    if len(rel) <= constants.enumeration_limit:
        vals = fwht(_dense(compress(q, rel)))
        neg = float(np.mean(vals < 0))
        method = "exact"
    else:
        from .poly import evaluate_real
        rng = np.random.default_rng(seed)
        pts = rng.choice(np.array([-1.0, 1.0]), size=(constants.mc_samples, q.n))
        neg = float(np.mean(evaluate_real(q, pts) < 0))
        method = f"monte_carlo:{constants.mc_samples}"
    if neg > 0.5:
        return 1.0 - neg, -1, method
    return neg, 1, method


def _dense(p: MultilinearPolynomial) -> np.ndarray:
    dense = np.zeros(1 << p.n)
    if len(p):
        dense[p.masks] = p.values
    return dense


def _classify(q: MultilinearPolynomial, tau: float, beta: float, constants: TheoryConstants,
              rho: Restriction) -> tuple[Optional[LeafClass], Optional[InfluenceProfile], dict]:
    if q.is_constant():
        s = 1 if q.constant_term >= 0 else -1
        return LeafClass(LeafKind.CLOSE_TO_CONSTANT, s, 0.0, {"method": "exact", "constant": True}), None, {}
    prof = influence_profile(q)
    if is_tau_regular(prof, tau):
        return LeafClass(LeafKind.REGULAR, evidence={
            "critical_index": 0,
            "max_influence_ratio": prof.max_influence / prof.total,
        }), prof, {}
    seed = [len(rho)] + [2 * i + (v > 0) for i, v in rho.fixed]
    dist, s, method = distance_to_constant(q, constants, seed=seed)
    if dist <= beta:
        return LeafClass(LeafKind.CLOSE_TO_CONSTANT, s, dist, {"method": method}), prof, {}
    return None, prof, {"distance_to_constant": dist, "method": method}


def build_tree(p: MultilinearPolynomial, tau: float, constants: TheoryConstants | None = None,
               degree: int | None = None) -> DecompositionTree:
    """Grow the regularity decomposition of ``sign(p)``.

    ``p`` is normalised to unit variance first (sign-preserving). Every leaf
    stores the restricted normalised polynomial and a verified class.
    """
    constants = constants or TheoryConstants()
    if p.variance == 0:
        s = 1 if p.constant_term >= 0 else -1
        leaf = Leaf(Restriction(), p, LeafClass(LeafKind.CLOSE_TO_CONSTANT, s, 0.0,
                                                 {"method": "exact", "constant": True}))
        return DecompositionTree(leaf, None, constants, p.n)
    if p.n > constants.enumeration_limit:
        raise ResourceLimitError(
            f"n = {p.n} exceeds the enumeration limit {constants.enumeration_limit}")
    if not 0 < tau < 1:
        raise InvalidInputError(f"tau must lie in (0, 1), got {tau}")
    d = degree if degree is not None else max(p.degree, 1)
    q0 = normalize_variance(p)
    # A root that is already a leaf needs no stage parameters, so tau >= 1/2 is fine there.
    cls, _, _ = _classify(q0, tau, tau, constants, Restriction())
    if cls is not None:
        params = derive_parameters(d, tau, constants) if tau < 0.5 else None
        return DecompositionTree(Leaf(Restriction(), q0, cls), params, constants, p.n)
    params = derive_parameters(d, tau, constants)

    def grow(q: MultilinearPolynomial, rho: Restriction, prefix: tuple[int, ...], stage: int) -> TreeItem:
        cls, prof, evidence = _classify(q, params.tau, params.beta, constants, rho)
        if cls is not None:
            return Leaf(rho, q, cls)
        prefix = tuple(v for v in prefix if prof.influences[v - 1] > 0)
        if not prefix:
            stage += 1
            if stage > params.stage_cap:
                return Leaf(rho, q, LeafClass(LeafKind.BAD, evidence={**evidence, "reason": "stage_cap"}))
            ell = critical_index(prof, params.tau_tilde)
            prefix = prof.order[:min(ell, params.stage_depth_cap)]
            evidence["stage_critical_index"] = ell
        if len(rho) >= params.depth_budget:
            return Leaf(rho, q, LeafClass(LeafKind.BAD, evidence={**evidence, "reason": "depth_budget"}))
        var, rest = prefix[0], prefix[1:]
        children = [grow(restrict(q, Restriction(((var, v),))), rho.extend(var, v), rest, stage)
                    for v in (-1, 1)]
        return Node(var, rho, children[0], children[1])

    root = grow(q0, Restriction(), (), 0)
    return DecompositionTree(root, params, constants, p.n)


@dataclass(frozen=True)
class PathMassReport:
    good_mass: float
    masses: dict
    counts: dict
    max_depth: int
    exhausted: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def path_mass(tree: DecompositionTree) -> PathMassReport:
    """Probability that a uniform random root-to-leaf walk ends in each leaf class."""
    masses = {k.value: 0.0 for k in LeafKind}
    counts = {k.value: 0 for k in LeafKind}
    max_depth = 0
    for leaf in tree.leaves():
        masses[leaf.kind.value] += 2.0 ** -leaf.depth
        counts[leaf.kind.value] += 1
        max_depth = max(max_depth, leaf.depth)
    bad = masses[LeafKind.BAD.value]
    return PathMassReport(good_mass=1.0 - bad, masses=masses, counts=counts,
                          max_depth=max_depth, exhausted=counts[LeafKind.BAD.value] > 0)


@dataclass(frozen=True, eq=False)
class CensusReport:
    head: tuple[int, ...]
    t_star: float
    tail_threshold: float
    target_fraction: float
    head_values: np.ndarray
    tail_norms: np.ndarray
    cond_i: np.ndarray
    cond_ii: np.ndarray
    distances: Optional[np.ndarray]

    @property
    def good(self) -> np.ndarray:
        return self.cond_i & self.cond_ii

    @property
    def good_fraction(self) -> float:
        return float(self.good.mean())

    def good_close(self, beta: float) -> bool:
        """Whether every good restriction leaves a function ``beta``-close to ``sign(p'(rho))``."""
        if self.distances is None:
            raise ResourceLimitError("distances were not computed")
        return bool(np.all(self.distances[self.good] <= beta))

    def to_dict(self) -> dict:
        return {
            "head": list(self.head), "t_star": self.t_star, "tail_threshold": self.tail_threshold,
            "target_fraction": self.target_fraction, "good_fraction": self.good_fraction,
            "cond_i_fraction": float(self.cond_i.mean()), "cond_ii_fraction": float(self.cond_ii.mean()),
            "head_values": self.head_values.tolist(), "tail_norms": self.tail_norms.tolist(),
            "distances": None if self.distances is None else self.distances.tolist(),
        }


def good_restriction_census(p: MultilinearPolynomial, K: int, beta: float,
                            constants: TheoryConstants | None = None) -> CensusReport:
    """Classify every assignment of the ``K`` most influential variables as good or not.

    Row ``r`` of every array corresponds to the assignment with ``x_{head[j]} = -1``
    iff bit ``j`` of ``r`` is set. ``p`` is normalised to unit variance first.
    Tail norms use the restricted coefficients ``sum_T p(S u T) rho_T``.
    """
    constants = constants or TheoryConstants()
    if K > 20:
        raise ResourceLimitError("K > 20 head restrictions are not enumerated")
    if not 0 <= K <= p.n:
        raise InvalidInputError(f"K must lie in [0, {p.n}]")
    if not 0 < beta < 1:
        raise InvalidInputError("beta must lie in (0, 1)")
    p = normalize_variance(p)
    d = max(p.degree, 1)
    prof = influence_profile(p)
    head = prof.order[:K]
    tail = prof.order[K:]
    head_mask = sum(1 << (v - 1) for v in head)
    t_star = 1.0 / (2.0 * constants.c ** d)
    tail_threshold = t_star * (constants.theta_dfn2 * math.log(1.0 / beta)) ** (-d / 2.0)

    # Group monomials by their tail part; each group is a head polynomial times chi_tail.
    groups: dict[int, dict[int, float]] = {}
    for mask, c in p.coeffs.items():
        groups.setdefault(mask & ~head_mask, {})[mask & head_mask] = c
    head_values = np.zeros(1 << K)
    tail_sq = np.zeros(1 << K)
    for tail_part, part in groups.items():
        poly = MultilinearPolynomial(p.n, p.degree_bound, part)
        vals = fwht(_dense(compress(poly, head)))
        if tail_part == 0:
            head_values = vals
        else:
            tail_sq += vals ** 2
    tail_norms = np.sqrt(tail_sq)
    cond_i = np.abs(head_values) >= t_star
    cond_ii = tail_norms <= tail_threshold

    distances = None
    n_tail = p.n - K
    if n_tail <= constants.enumeration_limit:
        ref = np.where(head_values >= 0, 1, -1)
        if p.n <= constants.enumeration_limit:
            vals = table_values(p, constants.enumeration_limit)
            rows = _sub_indices(head)
            cols = _sub_indices(tail)
            block = vals[rows[:, None] | cols[None, :]]
            distances = np.mean(sign(block) != ref[:, None], axis=1)
        else:
            distances = np.empty(1 << K)
            for r in range(1 << K):
                rho = Restriction(tuple((v, -1 if (r >> j) & 1 else 1) for j, v in enumerate(head)))
                q = restrict(p, rho)
                sub = fwht(_dense(compress(q, tail)))
                distances[r] = float(np.mean(sign(sub) != ref[r]))
    return CensusReport(head=tuple(head), t_star=t_star, tail_threshold=tail_threshold,
                        target_fraction=1.0 / (2.0 * constants.c ** d),
                        head_values=head_values, tail_norms=tail_norms,
                        cond_i=cond_i, cond_ii=cond_ii, distances=distances)


def _sub_indices(variables) -> np.ndarray:
    """Full-table index contributions for every assignment of ``variables``."""
    k = len(variables)
    r = np.arange(1 << k, dtype=np.int64)
    out = np.zeros(1 << k, dtype=np.int64)
    for j, v in enumerate(variables):
        out |= ((r >> j) & 1) << (v - 1)
    return out
