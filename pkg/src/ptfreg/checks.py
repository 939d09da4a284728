"""Exact and Monte Carlo checkers for moment, tail and anti-concentration bounds,
plus the pairwise-distance ensemble of random +-1 degree-d polynomials."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .constants import TheoryConstants
from .errors import DegenerateInputError, InvalidInputError, ResourceLimitError
from .influence import influence_profile, is_tau_regular
from .poly import (
    MultilinearPolynomial,
    _check_enumerable,
    evaluate_real,
    masks_of_degree,
    multiply,
    norms,
    table_values,
)

HARD_TOL = 1e-9
DKW_DELTA = 0.05
# Ensemble sign tables are held as int8; cap their total size.
ENSEMBLE_TABLE_BUDGET = 1 << 28

PASS, FAIL, INFO, NOT_APPLICABLE = "pass", "fail", "info", "n/a"


@dataclass
class CheckReport:
    """One check outcome.

    ``status`` is ``pass``/``fail`` for hard assertions, ``info`` for bounds
    with unknown constants and ``n/a`` when the check does not apply. Monte
    Carlo reports carry ``samples`` and ``seed``; exact ones leave both unset.
    """

    name: str
    params: dict
    measured: Optional[float]
    bound: Optional[float]
    status: str
    method: str = "exact"
    samples: Optional[int] = None
    seed: Optional[object] = None
    details: dict = field(default_factory=dict)

    @property
    def hard(self) -> bool:
        return self.status in (PASS, FAIL)

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    def to_dict(self) -> dict:
        out = {"check": self.name, "params": self.params, "measured": self.measured,
               "bound": self.bound, "status": self.status, "method": self.method,
               "details": self.details}
        if self.method != "exact":
            out["samples"] = self.samples
            out["seed"] = self.seed
        return out


def _sign_table(p: MultilinearPolynomial, limit) -> np.ndarray:
    return np.where(table_values(p, limit) >= 0, 1, -1).astype(np.int8)


def dist(f: MultilinearPolynomial, g: MultilinearPolynomial,
         constants: TheoryConstants | None = None, seed=0) -> float:
    """``Pr_x[sign f(x) != sign g(x)]``: exact up to the enumeration limit, else Monte Carlo."""
    constants = constants or TheoryConstants()
    if f.n != g.n:
        raise InvalidInputError(f"dimension mismatch: {f.n} vs {g.n}")
    if f.n <= constants.enumeration_limit:
        lim = constants.enumeration_limit
        return float(np.mean(_sign_table(f, lim) != _sign_table(g, lim)))
    rng = np.random.default_rng(seed)
    pts = rng.choice(np.array([-1.0, 1.0]), size=(constants.mc_samples, f.n))
    return float(np.mean((evaluate_real(f, pts) >= 0) != (evaluate_real(g, pts) >= 0)))


def hypercontractivity_check(p: MultilinearPolynomial,
                             constants: TheoryConstants | None = None) -> CheckReport:
    """``||p||_4 <= 3^(d/2) ||p||_2`` from exact norms. A failure is an arithmetic bug."""
    constants = constants or TheoryConstants()
    d = p.degree
    l2, l4 = norms(p, constants.enumeration_limit)
    bound = 3.0 ** (d / 2.0) * l2
    status = PASS if l4 <= bound + HARD_TOL else FAIL
    return CheckReport("hypercontractivity", {"n": p.n, "d": d}, l4, bound, status,
                       details={"l2": l2, "l4": l4})


def _tail_probability(values: np.ndarray, level: float) -> float:
    return float(np.mean(np.abs(values) >= level))


def concentration_tail(p: MultilinearPolynomial, t: float,
                       constants: TheoryConstants | None = None) -> CheckReport:
    """Exact ``Pr[|p| >= t ||p||_2]`` next to ``exp(-b t^(2/d))`` (informational)."""
    constants = constants or TheoryConstants()
    d = max(p.degree, 1)
    if not t > math.e ** d:
        raise InvalidInputError(f"t must exceed e^d = {math.e ** d:.4g}, got {t}")
    l2, _ = norms(p, constants.enumeration_limit)
    measured = _tail_probability(table_values(p, constants.enumeration_limit), t * l2)
    bound = math.exp(-constants.concentration_b * t ** (2.0 / d))
    return CheckReport("concentration", {"t": t, "d": d, "b": constants.concentration_b},
                       measured, bound, INFO, details={"l2": l2})


def concentration_profile(p: MultilinearPolynomial, ts: Sequence[float],
                          constants: TheoryConstants | None = None) -> CheckReport:
    """Tail probabilities on an increasing grid; asserts they never increase."""
    ts = sorted(float(t) for t in ts)
    reports = [concentration_tail(p, t, constants) for t in ts]
    tails = [r.measured for r in reports]
    monotone = all(b <= a for a, b in zip(tails, tails[1:]))
    return CheckReport("concentration_monotone", {"grid": ts}, max(tails) if tails else None, None,
                       PASS if monotone else FAIL,
                       details={"tails": tails, "bounds": [r.bound for r in reports]})


def _escape_probability(values: np.ndarray, l2: float, c0: float, d: int) -> float:
    return float(np.mean(values > c0 ** -d * l2))


def anticoncentration_check(p: MultilinearPolynomial,
                            constants: TheoryConstants | None = None) -> CheckReport:
    """Exact ``Pr[p > c0^-d ||p||_2]`` against ``c0^-d`` for a zero-mean ``p``.

    A failure is calibration data: ``details["minimal_c0"]`` holds the least
    ``c0`` for which the inequality holds.
    """
    constants = constants or TheoryConstants()
    if abs(p.constant_term) > HARD_TOL:
        raise InvalidInputError("polynomial must have zero mean")
    d = max(p.degree, 1)
    l2, _ = norms(p, constants.enumeration_limit)
    if l2 == 0:
        raise DegenerateInputError("zero polynomial")
    vals = table_values(p, constants.enumeration_limit)
    measured = _escape_probability(vals, l2, constants.c0, d)
    bound = constants.c0 ** -d
    ok = measured > bound
    details = {"c0": constants.c0, "d": d}
    if not ok:
        details["minimal_c0"] = minimal_passing_c0(p, constants)
    return CheckReport("anticoncentration", {"n": p.n, "d": d}, measured, bound,
                       PASS if ok else FAIL, details=details)


def minimal_passing_c0(p: MultilinearPolynomial, constants: TheoryConstants | None = None,
                       tol: float = 1e-6) -> float:
    """Least ``c0`` (to ``tol``) with ``Pr[p > c0^-d ||p||_2] > c0^-d``.

    Raising ``c0`` lowers the threshold and the bound together, so the
    predicate is monotone in ``c0``.
    """
    constants = constants or TheoryConstants()
    d = max(p.degree, 1)
    l2, _ = norms(p, constants.enumeration_limit)
    vals = table_values(p, constants.enumeration_limit)
    if not np.any(vals > 0):
        raise DegenerateInputError("polynomial is never positive")

    def holds(c0):
        return _escape_probability(vals, l2, c0, d) > c0 ** -d

    lo, hi = 1.0, 2.0
    if holds(lo):
        return lo
    while not holds(hi):
        lo, hi = hi, hi * 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _require_unit_variance(p: MultilinearPolynomial) -> None:
    if abs(p.variance - 1.0) > HARD_TOL:
        raise InvalidInputError(f"polynomial must have unit variance, got {p.variance}")


def regular_anticoncentration(p: MultilinearPolynomial, tau: float,
                              constants: TheoryConstants | None = None, *,
                              strict: bool = True) -> CheckReport:
    """Exact ``Pr[|p| <= tau]`` for a unit-variance ``tau``-regular ``p``.

    The bound ``regular_anticoncentration_const * d * tau^(1/(8d))`` is informational. With
    ``strict=False`` a non-regular input is measured anyway and flagged.
    """
    constants = constants or TheoryConstants()
    _require_unit_variance(p)
    regular = is_tau_regular(p, tau)
    if strict and not regular:
        raise InvalidInputError(f"polynomial is not {tau}-regular")
    d = max(p.degree, 1)
    measured = float(np.mean(np.abs(table_values(p, constants.enumeration_limit)) <= tau))
    bound = constants.regular_anticoncentration_const * d * tau ** (1.0 / (8 * d))
    return CheckReport("regular_anticoncentration", {"tau": tau, "d": d}, measured, bound, INFO,
                       details={"within_bound": measured <= bound, "precondition_met": regular,
                                "leading_constant": constants.regular_anticoncentration_const})


def sup_cdf_gap(a: np.ndarray, b: np.ndarray) -> float:
    """``sup_t |F_a(t) - F_b(t)|`` for two empirical distributions.

    Both CDFs are step functions, so the supremum is attained at a jump point
    ``u`` either at ``u`` or just below it.
    """
    a, b = np.sort(np.asarray(a, float)), np.sort(np.asarray(b, float))
    grid = np.union1d(a, b)
    gaps = []
    for side in ("right", "left"):
        fa = np.searchsorted(a, grid, side=side) / a.size
        fb = np.searchsorted(b, grid, side=side) / b.size
        gaps.append(np.abs(fa - fb).max())
    return float(max(gaps))


def dkw_band(samples: int, delta: float = DKW_DELTA) -> float:
    """Half-width of the Dvoretzky-Kiefer-Wolfowitz band at confidence ``1 - delta``."""
    return math.sqrt(math.log(2.0 / delta) / (2.0 * samples))


def gaussian_invariance_gap(p: MultilinearPolynomial, samples: int | None = None, seed=0,
                            constants: TheoryConstants | None = None) -> CheckReport:
    """Sup gap between the exact Boolean CDF of ``p`` and a sampled Gaussian CDF."""
    constants = constants or TheoryConstants()
    _require_unit_variance(p)
    samples = samples or constants.mc_samples
    d = max(p.degree, 1)
    boolean = table_values(p, constants.enumeration_limit)
    rng = np.random.default_rng(seed)
    gaussian = evaluate_real(p, rng.standard_normal((samples, p.n)))
    gap = sup_cdf_gap(boolean, gaussian)
    max_inf = influence_profile(p).max_influence
    bound = constants.regular_anticoncentration_const * d * max_inf ** (1.0 / (8 * d))
    return CheckReport("invariance", {"n": p.n, "d": d}, gap, bound, INFO,
                       method=f"monte_carlo:{samples}", samples=samples, seed=seed,
                       details={"dkw_band": dkw_band(samples), "dkw_delta": DKW_DELTA,
                                "max_influence": max_inf})


def sample_from_D(n: int, d: int, seed) -> MultilinearPolynomial:
    """Uniform +-1 coefficient on every ``|S| = d`` monomial, nothing else."""
    if not 1 <= d <= n:
        raise InvalidInputError("need 1 <= d <= n")
    masks = masks_of_degree(n, d)
    rng = np.random.default_rng(seed)
    signs = 2.0 * rng.integers(0, 2, size=len(masks)) - 1.0
    return MultilinearPolynomial(n, d, dict(zip(masks, signs.tolist())))


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    n: int
    d: int
    seed: object
    seeds: list
    polys: list
    distances: np.ndarray
    chat_empty: np.ndarray
    variances: np.ndarray
    bias_threshold: float
    variance_threshold: float
    half_n: int
    odd_n: bool
    consistent: bool
    max_consistency_error: float
    constants: TheoryConstants

    @property
    def M(self) -> int:
        return len(self.polys)

    def _offdiag(self, arr: np.ndarray) -> np.ndarray:
        iu = np.triu_indices(self.M, k=1)
        return arr[iu]

    @property
    def min_distance(self) -> Optional[float]:
        off = self._offdiag(self.distances)
        return float(off.min()) if off.size else None

    @property
    def distance_floor(self) -> float:
        return self.constants.c ** -self.d

    def threshold_fractions(self) -> dict:
        bias = self._offdiag(np.abs(self.chat_empty))
        var = self._offdiag(self.variances)
        if not bias.size:
            return {"small_bias": None, "large_variance": None, "both": None}
        small = bias <= self.bias_threshold
        large = var >= self.variance_threshold
        return {"small_bias": float(small.mean()), "large_variance": float(large.mean()),
                "both": float((small & large).mean())}

    def to_dict(self) -> dict:
        off = self._offdiag(self.distances)
        return {
            "M": self.M, "n": self.n, "d": self.d, "seed": self.seed,
            "poly_seeds": self.seeds,
            "distances": self.distances.tolist(),
            "chat_empty": self.chat_empty.tolist(),
            "variances": self.variances.tolist(),
            "min_distance": self.min_distance,
            "distance_floor": self.distance_floor,
            "fraction_above_floor": float((off >= self.distance_floor).mean()) if off.size else None,
            "product_thresholds": {"half_n": self.half_n, "odd_n_floored": self.odd_n,
                                 "bias": self.bias_threshold, "variance": self.variance_threshold},
            "threshold_fractions": self.threshold_fractions(),
            "consistent": self.consistent,
            "max_consistency_error": self.max_consistency_error,
            "constants": self.constants.to_dict(),
        }


def _pair_statistics(a: MultilinearPolynomial, b: MultilinearPolynomial, ta: np.ndarray,
                     tb: np.ndarray, limit: int) -> tuple[float, float, float]:
    """Constant term and variance of ``a*b`` plus the largest pointwise oracle error."""
    c = multiply(a, b)
    prof = influence_profile(c)
    err = float(np.abs(table_values(c, limit) - ta * tb).max())
    err = max(err, abs(prof.variance - c.variance))
    return c.constant_term, prof.variance, err


def ensemble_experiment(M: int, n: int, d: int, seed=0,
                        constants: TheoryConstants | None = None) -> EnsembleResult:
    """Exact pairwise sign distances among ``M`` draws of :func:`sample_from_D`.

    Draw ``i`` uses seed ``[seed, i]``. For every pair, the product ``c = a*b``
    is formed with :func:`multiply`; its constant term is cross-checked against
    ``sum_S a(S) b(S)`` and its values against the pointwise product.
    """
    constants = constants or TheoryConstants()
    if M < 1:
        raise InvalidInputError("M must be positive")
    _check_enumerable(n, constants.enumeration_limit)
    N = 1 << n
    if M * N > ENSEMBLE_TABLE_BUDGET:
        raise ResourceLimitError(f"M * 2^n = {M * N} exceeds the table budget")
    seeds = [[seed, i] for i in range(M)]
    polys = [sample_from_D(n, d, s) for s in seeds]
    tables = np.stack([table_values(p, constants.enumeration_limit) for p in polys])
    signs = np.where(tables >= 0, 1.0, -1.0)
    # integer agreements, exact in float64
    gram = signs @ signs.T
    distances = (N - gram) / (2.0 * N)
    coeffs = np.stack([p.values for p in polys])
    chat_direct = coeffs @ coeffs.T

    chat = np.zeros((M, M))
    variances = np.zeros((M, M))
    max_err = 0.0
    for i in range(M):
        for j in range(i, M):
            c0, var, err = _pair_statistics(polys[i], polys[j], tables[i], tables[j],
                                            constants.enumeration_limit)
            chat[i, j] = chat[j, i] = c0
            variances[i, j] = variances[j, i] = var
            max_err = max(max_err, err, abs(c0 - chat_direct[i, j]))

    half = n // 2
    binom = math.comb(half, d)
    return EnsembleResult(
        n=n, d=d, seed=seed, seeds=seeds, polys=polys, distances=distances,
        chat_empty=chat, variances=variances,
        bias_threshold=0.25 * constants.c ** -d * binom,
        variance_threshold=binom ** 2 / 12.0,
        half_n=half, odd_n=bool(n % 2), consistent=max_err <= HARD_TOL,
        max_consistency_error=max_err, constants=constants)
