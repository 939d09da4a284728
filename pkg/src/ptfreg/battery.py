"""Seeded check battery driven by ``ptfreg verify``.

Each entry aggregates one property over a small deterministic corpus and
yields a single :class:`CheckReport`.
"""
from __future__ import annotations

import math
from typing import Callable, Iterable, Optional

import numpy as np

from .checks import (
    FAIL,
    INFO,
    NOT_APPLICABLE,
    PASS,
    CheckReport,
    anticoncentration_check,
    concentration_profile,
    gaussian_invariance_gap,
    hypercontractivity_check,
    regular_anticoncentration,
)
from .constants import TheoryConstants
from .errors import InvalidInputError
from .influence import critical_index, influence_profile, is_l2_regular, is_tau_regular, tail_influence_sum
from .poly import (
    MultilinearPolynomial,
    Restriction,
    TruthTable,
    fwht_analyze,
    fwht_synthesize,
    random_polynomial,
    restrict,
)

HARD_TOL = 1e-9


def head_restrictions(head) -> Iterable[Restriction]:
    """All ``2^k`` assignments of the variables in ``head``."""
    k = len(head)
    for r in range(1 << k):
        yield Restriction(tuple((v, -1 if (r >> j) & 1 else 1) for j, v in enumerate(head)))


def restriction_influence_average(p: MultilinearPolynomial, head) -> np.ndarray:
    """Mean of the influence vector of ``p_rho`` over every assignment ``rho`` of ``head``."""
    acc = np.zeros(p.n)
    count = 0
    for rho in head_restrictions(head):
        acc += influence_profile(restrict(p, rho)).influences
        count += 1
    return acc / count


def tail_decay_violations(p: MultilinearPolynomial, tau: float) -> int:
    """Number of ``j`` up to the critical index where the tail sum exceeds ``(1 - tau)^j Inf(p)``."""
    prof = influence_profile(p)
    k = critical_index(prof, tau)
    return sum(tail_influence_sum(prof, j) > (1 - tau) ** j * prof.total + HARD_TOL
               for j in range(int(k) + 1))


def influence_growth_fraction(p: MultilinearPolynomial, j: int, t: float) -> float:
    """Fraction of (restriction of the top ``j`` variables, unfixed variable) pairs whose
    influence grows past ``3^d t`` times its unrestricted value."""
    prof = influence_profile(p)
    head = prof.order[:j]
    free = [v - 1 for v in prof.order[j:] if prof.influences[v - 1] > 0]
    if not free:
        return 0.0
    factor = 3.0 ** p.degree * t
    hits = total = 0
    for rho in head_restrictions(head):
        inf = influence_profile(restrict(p, rho)).influences
        hits += int(np.sum(inf[free] > factor * prof.influences[free]))
        total += len(free)
    return hits / total


def parseval_check(table: TruthTable) -> CheckReport:
    """``sum_S f(S)^2 = 1`` for a +-1 table; not applicable to other tables."""
    if not table.is_boolean():
        return CheckReport("parseval", {"n": table.n}, None, None, NOT_APPLICABLE,
                           details={"reason": "table is not +-1 valued"})
    weight = float(np.sum(fwht_analyze(table).values ** 2))
    return CheckReport("parseval", {"n": table.n}, weight, 1.0,
                       PASS if abs(weight - 1.0) <= HARD_TOL else FAIL)


def _corpus(seed, count: int, n: int, d: int, include_constant: bool = True):
    return [random_polynomial(n, d, [seed, n, d, i], include_constant=include_constant)
            for i in range(count)]


def _aggregate(name: str, params: dict, failures: int, total: int, measured=None, bound=None,
               details: Optional[dict] = None) -> CheckReport:
    return CheckReport(name, {**params, "instances": total}, measured, bound,
                       PASS if failures == 0 else FAIL,
                       details={"failures": failures, **(details or {})})


def check_parseval(seed, constants):
    rng = np.random.default_rng([seed, 0])
    worst, fails = 0.0, 0
    for n in range(1, 11):
        table = TruthTable(n, rng.choice([-1.0, 1.0], size=1 << n))
        rep = parseval_check(table)
        worst = max(worst, abs(rep.measured - 1.0))
        fails += rep.failed
    return _aggregate("parseval", {"n_range": [1, 10]}, fails, 10, measured=worst, bound=HARD_TOL)


def check_roundtrip(seed, constants):
    worst = 0.0
    for p in _corpus(seed, 10, 12, 3):
        back = fwht_analyze(fwht_synthesize(p, constants.enumeration_limit))
        diff = (back - p)
        worst = max(worst, float(np.abs(diff.values).max()) if len(diff) else 0.0)
    return _aggregate("roundtrip", {"n": 12, "d": 3}, int(worst > 1e-12), 10,
                      measured=worst, bound=1e-12)


def check_restriction_average(seed, constants):
    worst, fails, total = 0.0, 0, 0
    for p in _corpus(seed, 5, 10, 3):
        prof = influence_profile(p)
        for k in range(1, 5):
            head = prof.order[:k]
            avg = restriction_influence_average(p, head)
            free = [v - 1 for v in prof.order[k:]]
            err = float(np.abs(avg[free] - prof.influences[free]).max())
            worst = max(worst, err)
            fails += err > HARD_TOL
            total += 1
    return _aggregate("restriction_average", {"n": 10, "d": 3, "k_range": [1, 4]}, fails, total,
                      measured=worst, bound=HARD_TOL)


def check_tail_decay(seed, constants):
    fails = total = 0
    for p in _corpus(seed, 10, 12, 3):
        for tau in (0.05, 0.1, 0.3):
            fails += tail_decay_violations(p, tau) > 0
            total += 1
    return _aggregate("tail_decay", {"n": 12, "d": 3, "taus": [0.05, 0.1, 0.3]}, fails, total)


def check_influence_growth(seed, constants):
    d = 2
    t = math.e ** (2 * d) + 1
    fractions = [influence_growth_fraction(p, 4, t) for p in _corpus(seed, 5, 10, d)]
    worst = max(fractions)
    return CheckReport("influence_growth", {"n": 10, "d": d, "j": 4, "t": t}, worst, 0.5,
                       PASS if worst < 0.5 else FAIL, details={"fractions": fractions})


def check_hypercontractivity(seed, constants):
    fails, worst = 0, 0.0
    corpus = _corpus(seed, 20, 10, 3)
    for p in corpus:
        rep = hypercontractivity_check(p, constants)
        fails += rep.failed
        worst = max(worst, rep.measured / rep.bound if rep.bound else 0.0)
    return _aggregate("hypercontractivity", {"n": 10, "d": 3}, fails, len(corpus),
                      measured=worst, bound=1.0, details={"max_ratio": worst})


def check_anticoncentration(seed, constants):
    corpus = _corpus(seed, 20, 10, 3, include_constant=False)
    reports = [anticoncentration_check(p, constants) for p in corpus]
    fails = sum(r.failed for r in reports)
    minimal = [r.details["minimal_c0"] for r in reports if r.failed]
    return _aggregate("anticoncentration", {"n": 10, "d": 3, "c0": constants.c0}, fails, len(corpus),
                      measured=1.0 - fails / len(corpus), bound=1.0,
                      details={"minimal_c0": max(minimal) if minimal else None})


def _majority9() -> MultilinearPolynomial:
    return MultilinearPolynomial.linear([1 / 3] * 9)


def check_concentration(seed, constants):
    corpus = [_majority9()] + _corpus(seed, 3, 10, 1)
    reports = [concentration_profile(p, [math.e + 0.1, 4.0, 8.0], constants) for p in corpus]
    fails = sum(r.failed for r in reports)
    return _aggregate("concentration", {"grid": [math.e + 0.1, 4.0, 8.0]}, fails, len(corpus),
                      details={"tails": [r.details["tails"] for r in reports]})


def check_regular_anticoncentration(seed, constants):
    rep = regular_anticoncentration(_majority9(), 1 / 9, constants)
    rep.name = "regular_anticoncentration"
    return rep


def check_invariance(seed, constants):
    return gaussian_invariance_gap(_majority9(), constants.mc_samples, [seed, 1], constants)


def check_l2_vs_linf(seed, constants):
    rows = []
    for p in _corpus(seed, 20, 10, 2):
        prof = influence_profile(p)
        eps = math.sqrt(float(np.dot(prof.influences, prof.influences))) / prof.total
        rows.append((eps, is_l2_regular(prof, eps), is_tau_regular(prof, min(eps, 0.999))))
    implied = all(linf for _, l2, linf in rows if l2)
    return CheckReport("l2_vs_linf", {"n": 10, "d": 2, "instances": len(rows)}, None, None, INFO,
                       details={"implication_holds": implied,
                                "l2_ratios": [r[0] for r in rows]})


BATTERY: dict[str, Callable[[object, TheoryConstants], CheckReport]] = {
    "parseval": check_parseval,
    "roundtrip": check_roundtrip,
    "restriction_average": check_restriction_average,
    "tail_decay": check_tail_decay,
    "influence_growth": check_influence_growth,
    "hypercontractivity": check_hypercontractivity,
    "anticoncentration": check_anticoncentration,
    "concentration": check_concentration,
    "regular_anticoncentration": check_regular_anticoncentration,
    "invariance": check_invariance,
    "l2_vs_linf": check_l2_vs_linf,
}


def run_battery(names=None, seed=0, constants: TheoryConstants | None = None) -> list[CheckReport]:
    """Run the named checks (all by default) in battery order."""
    constants = constants or TheoryConstants()
    names = list(BATTERY) if not names else list(names)
    unknown = [n for n in names if n not in BATTERY]
    if unknown:
        raise InvalidInputError(f"unknown check(s): {', '.join(unknown)}")
    return [BATTERY[name](seed, constants) for name in names]
