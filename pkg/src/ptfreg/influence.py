"""Influences, the critical index, and regularity predicates."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import TheoryConstants
from .errors import DegenerateInputError, InvalidInputError
from .poly import MultilinearPolynomial, popcount

__all__ = [
    "INFINITE_INDEX",
    "InfluenceProfile",
    "TheoryConstants",
    "critical_index",
    "head_tail_split",
    "influence_profile",
    "is_l2_regular",
    "is_tau_regular",
    "tail_influence_sum",
]

#: Returned by :func:`critical_index` when no index satisfies the defining
#: inequality. Unreachable once empty tails count as satisfying it.
INFINITE_INDEX = math.inf

# Slack on the defining inequality, relative to max(1, total influence).
COMPARISON_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class InfluenceProfile:
    influences: np.ndarray
    total: float
    variance: float
    order: tuple[int, ...]

    @property
    def sorted_influences(self) -> np.ndarray:
        return self.influences[np.asarray(self.order, dtype=np.int64) - 1]

    @property
    def max_influence(self) -> float:
        return float(self.influences.max()) if self.influences.size else 0.0


def influence_profile(p: MultilinearPolynomial) -> InfluenceProfile:
    """``Inf_i(p) = sum_{S containing i} p(S)^2`` for every variable.

    ``order`` lists variables (1-based) by nonincreasing influence, ties broken
    by ascending index.
    """
    sq = p.values ** 2
    bits = (p.masks[:, None] >> np.arange(p.n, dtype=np.int64)) & 1
    influences = sq @ bits if p.n else np.zeros(0)
    influences = np.asarray(influences, dtype=np.float64)
    # lexsort: last key is primary
    order = np.lexsort((np.arange(p.n), -influences)) + 1
    nonconst = p.masks != 0
    return InfluenceProfile(
        influences=influences,
        total=float(np.dot(sq, popcount(p.masks))),
        variance=float(sq[nonconst].sum()),
        order=tuple(int(i) for i in order),
    )


def _profile(p_or_profile) -> InfluenceProfile:
    if isinstance(p_or_profile, InfluenceProfile):
        return p_or_profile
    return influence_profile(p_or_profile)


def critical_index(p: MultilinearPolynomial | InfluenceProfile, tau: float):
    """Least ``i >= 0`` with ``Inf_(i+1) <= tau * sum_{j > i} Inf_(j)`` in sorted order.

    An empty tail satisfies the inequality, so the result never exceeds the
    number of relevant variables.
    """
    if not 0 < tau < 1:
        raise InvalidInputError(f"tau must lie in (0, 1), got {tau}")
    prof = _profile(p)
    if not prof.variance > 0:
        raise DegenerateInputError("critical index of a constant polynomial is undefined")
    inf = prof.sorted_influences
    tails = np.cumsum(inf[::-1])[::-1]
    slack = COMPARISON_SLACK * max(1.0, prof.total)
    ok = np.flatnonzero(inf <= tau * tails + slack)
    if ok.size:
        return int(ok[0])
    # empty tail at i = n
    return len(inf) if len(inf) else INFINITE_INDEX


def is_tau_regular(p: MultilinearPolynomial | InfluenceProfile, tau: float) -> bool:
    return critical_index(p, tau) == 0


def is_l2_regular(p: MultilinearPolynomial | InfluenceProfile, eps: float) -> bool:
    """``||(Inf_1, ..., Inf_n)||_2 <= eps * sum_i Inf_i``."""
    prof = _profile(p)
    if not prof.total > 0:
        raise DegenerateInputError("l2 regularity of a constant polynomial is undefined")
    lhs = math.sqrt(float(np.dot(prof.influences, prof.influences)))
    return lhs <= eps * prof.total + COMPARISON_SLACK * max(1.0, prof.total)


def head_tail_split(p: MultilinearPolynomial, K: int,
                    profile: InfluenceProfile | None = None
                    ) -> tuple[MultilinearPolynomial, MultilinearPolynomial]:
    """Split ``p`` into monomials inside the ``K`` most influential variables and the rest."""
    if not 0 <= K <= p.n:
        raise InvalidInputError(f"K must lie in [0, {p.n}]")
    prof = profile or influence_profile(p)
    head_mask = sum(1 << (v - 1) for v in prof.order[:K])
    head = {m: c for m, c in p.coeffs.items() if m & ~head_mask == 0}
    tail = {m: c for m, c in p.coeffs.items() if m & ~head_mask}
    return (MultilinearPolynomial(p.n, p.degree_bound, head),
            MultilinearPolynomial(p.n, p.degree_bound, tail))


def tail_influence_sum(p: MultilinearPolynomial | InfluenceProfile, j: int) -> float:
    """``sum_{i > j} Inf_(i)`` over the sorted influence vector."""
    prof = _profile(p)
    if not 0 <= j <= len(prof.influences):
        raise InvalidInputError(f"j must lie in [0, {len(prof.influences)}]")
    return float(prof.sorted_influences[j:].sum())
