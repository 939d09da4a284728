"""Multilinear polynomials over the Boolean cube {-1, 1}^n.

A polynomial is stored sparsely as a map from subset bitmask to real
coefficient: bit ``i`` of a mask is set iff variable ``i + 1`` belongs to the
monomial.  Dense views (truth tables) are produced on demand with the fast
Walsh-Hadamard transform.

Truth tables use the index convention: entry ``b`` holds the value at the point
with ``x_{i+1} = -1`` iff bit ``i`` of ``b`` is set, so index 0 is the all-ones
point and ``chi_S(x_b) = (-1)^popcount(S & b)``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateInputError, InvalidInputError, ResourceLimitError

MAX_VARIABLES = 30
DEFAULT_ENUMERATION_LIMIT = 20


def popcount(masks):
    """Vectorised popcount for integer arrays (or a Python int)."""
    if isinstance(masks, (int, np.integer)):
        return int(masks).bit_count()
    return np.bitwise_count(np.asarray(masks, dtype=np.int64)).astype(np.int64)


def sign(values):
    """Elementwise sign with the convention sign(0) = +1."""
    return np.where(np.asarray(values) >= 0, 1, -1).astype(np.int8)


def masks_of_degree(n: int, k: int) -> list[int]:
    """All masks over ``n`` variables with exactly ``k`` bits set, in lexicographic
    order of their sorted variable lists."""
    return [sum(1 << i for i in combo) for combo in itertools.combinations(range(n), k)]


def mask_to_vars(mask: int) -> tuple[int, ...]:
    """1-based sorted variable indices of a mask."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i + 1)
        mask >>= 1
        i += 1
    return tuple(out)


def vars_to_mask(variables: Iterable[int], n: int | None = None) -> int:
    mask = 0
    for v in variables:
        v = int(v)
        if v < 1 or (n is not None and v > n):
            raise InvalidInputError(f"variable index {v} out of range [1, {n}]")
        if mask >> (v - 1) & 1:
            raise InvalidInputError(f"variable {v} repeated in monomial")
        mask |= 1 << (v - 1)
    return mask


def _check_enumerable(n: int, limit: int | None) -> None:
    limit = DEFAULT_ENUMERATION_LIMIT if limit is None else limit
    if n > limit:
        raise ResourceLimitError(f"n = {n} exceeds the enumeration limit {limit}")


@dataclass(frozen=True, eq=False)
class MultilinearPolynomial:
    """Real multilinear polynomial ``sum_S coeffs[S] * chi_S(x)``.

    Parameters
    ----------
    n : int
        Number of variables.
    degree_bound : int
        Upper bound on the size of every monomial with a stored coefficient.
    coeffs : mapping of int to float
        Subset bitmask to coefficient. Exact zeros are dropped.
    """

    n: int
    degree_bound: int
    coeffs: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or not 0 <= self.n <= MAX_VARIABLES:
            raise InvalidInputError(f"n must be an integer in [0, {MAX_VARIABLES}], got {self.n!r}")
        if self.degree_bound < 0:
            raise InvalidInputError("degree_bound must be nonnegative")
        clean = {}
        limit = 1 << self.n
        for mask, c in self.coeffs.items():
            mask = int(mask)
            if not 0 <= mask < limit:
                raise InvalidInputError(f"mask {mask} out of range for n = {self.n}")
            if mask.bit_count() > self.degree_bound:
                raise InvalidInputError(
                    f"monomial {mask_to_vars(mask)} exceeds degree bound {self.degree_bound}")
            c = float(c)
            if not math.isfinite(c):
                raise InvalidInputError("coefficients must be finite")
            if c != 0.0:
                clean[mask] = c
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "degree_bound", int(self.degree_bound))
        object.__setattr__(self, "coeffs", MappingProxyType(dict(sorted(clean.items()))))

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_arrays(cls, n: int, degree_bound: int, masks, values) -> "MultilinearPolynomial":
        return cls(n, degree_bound, dict(zip(np.asarray(masks).tolist(), np.asarray(values).tolist())))

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[tuple[Sequence[int], float]],
                   degree_bound: int | None = None) -> "MultilinearPolynomial":
        """Build from ``(variables, coefficient)`` pairs with 1-based variables.

        Repeated monomials are summed.

        >>> MultilinearPolynomial.from_terms(2, [((), -0.5), ((1,), 0.5), ((2,), 0.5), ((1, 2), 0.5)])
        MultilinearPolynomial(n=2, -0.5 + 0.5*x1 + 0.5*x2 + 0.5*x1x2)
        """
        acc: dict[int, float] = {}
        for variables, c in terms:
            mask = vars_to_mask(variables, n)
            acc[mask] = acc.get(mask, 0.0) + float(c)
        if degree_bound is None:
            degree_bound = max((m.bit_count() for m, c in acc.items() if c != 0), default=0)
        return cls(n, degree_bound, acc)

    @classmethod
    def zero(cls, n: int) -> "MultilinearPolynomial":
        return cls(n, 0, {})

    @classmethod
    def constant(cls, n: int, value: float) -> "MultilinearPolynomial":
        return cls(n, 0, {0: value})

    @classmethod
    def character(cls, n: int, variables: Sequence[int], coeff: float = 1.0) -> "MultilinearPolynomial":
        mask = vars_to_mask(variables, n)
        return cls(n, mask.bit_count(), {mask: coeff})

    @classmethod
    def linear(cls, weights: Sequence[float], threshold: float = 0.0) -> "MultilinearPolynomial":
        """``sum_i w_i x_i - threshold``."""
        n = len(weights)
        coeffs = {1 << i: w for i, w in enumerate(weights)}
        coeffs[0] = -threshold
        return cls(n, 1, coeffs)

    # -- views --------------------------------------------------------------

    @cached_property
    def masks(self) -> np.ndarray:
        return np.fromiter(self.coeffs.keys(), dtype=np.int64, count=len(self.coeffs))

    @cached_property
    def values(self) -> np.ndarray:
        return np.fromiter(self.coeffs.values(), dtype=np.float64, count=len(self.coeffs))

    @property
    def degree(self) -> int:
        """Largest monomial size with a nonzero coefficient (0 for constants)."""
        return int(popcount(self.masks).max()) if len(self.coeffs) else 0

    @property
    def constant_term(self) -> float:
        return self.coeffs.get(0, 0.0)

    @property
    def variance(self) -> float:
        v = self.values
        return float(np.dot(v, v) - self.constant_term ** 2)

    @property
    def support_mask(self) -> int:
        """Union of all monomials: the variables the polynomial depends on."""
        return int(np.bitwise_or.reduce(self.masks)) if len(self.coeffs) else 0

    def relevant_variables(self) -> tuple[int, ...]:
        return mask_to_vars(self.support_mask)

    def __getitem__(self, mask: int) -> float:
        return self.coeffs.get(int(mask), 0.0)

    def __len__(self) -> int:
        return len(self.coeffs)

    def terms(self) -> list[tuple[tuple[int, ...], float]]:
        return [(mask_to_vars(m), c) for m, c in self.coeffs.items()]

    def is_constant(self) -> bool:
        return all(m == 0 for m in self.coeffs)

    # -- arithmetic sugar ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, MultilinearPolynomial):
            return linear_combine([(1.0, self), (1.0, other)])
        return linear_combine([(1.0, self), (float(other), MultilinearPolynomial.constant(self.n, 1.0))])

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, MultilinearPolynomial):
            return multiply(self, other)
        return self.scale(float(other))

    __rmul__ = __mul__

    def scale(self, factor: float) -> "MultilinearPolynomial":
        return MultilinearPolynomial(self.n, self.degree_bound,
                                     {m: c * factor for m, c in self.coeffs.items()})

    def with_degree_bound(self, degree_bound: int) -> "MultilinearPolynomial":
        return MultilinearPolynomial(self.n, degree_bound, self.coeffs)

    def allclose(self, other: "MultilinearPolynomial", atol: float = 1e-12) -> bool:
        if self.n != other.n:
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(self[k] - other[k]) <= atol for k in keys)

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def __repr__(self) -> str:
        if not self.coeffs:
            body = "0"
        else:
            parts = []
            for mask, c in self.coeffs.items():
                mono = "".join(f"x{v}" for v in mask_to_vars(mask))
                parts.append(f"{c:.6g}" if not mono else f"{c:.6g}*{mono}")
            body = " + ".join(parts)
        return f"MultilinearPolynomial(n={self.n}, {body})"

    # -- serialisation ------------------------------------------------------

    def to_dict(self) -> dict:
        terms = sorted(self.terms(), key=lambda t: (len(t[0]), t[0]))
        return {"n": self.n, "degree": self.degree_bound,
                "terms": [[list(v), c] for v, c in terms]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "MultilinearPolynomial":
        try:
            n = int(data["n"])
            degree = int(data["degree"])
            terms = [(tuple(int(v) for v in vs), float(c)) for vs, c in data["terms"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed polynomial document: {exc}") from exc
        poly = cls.from_terms(n, terms, degree_bound=degree)
        return poly


@dataclass(frozen=True, eq=False)
class TruthTable:
    """The ``2^n`` values of a function on the cube, in the package's index order."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (1 << self.n,):
            raise InvalidInputError(f"truth table for n = {self.n} needs {1 << self.n} entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, n: int, func) -> "TruthTable":
        return cls(n, [func(index_to_point(b, n)) for b in range(1 << n)])

    def is_boolean(self) -> bool:
        return bool(np.all(np.abs(self.values) == 1.0))


@dataclass(frozen=True)
class Restriction:
    """Partial assignment of variables to +-1, kept in assignment order.

    ``fixed`` holds ``(variable, value)`` pairs with 1-based variables.
    """

    fixed: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple((int(i), int(v)) for i, v in self.fixed)
        seen = set()
        for i, v in pairs:
            if i < 1:
                raise InvalidInputError(f"variable index {i} must be >= 1")
            if v not in (-1, 1):
                raise InvalidInputError(f"restriction value {v} for x{i} is not +-1")
            if i in seen:
                raise InvalidInputError(f"variable x{i} fixed twice")
            seen.add(i)
        object.__setattr__(self, "fixed", pairs)

    @classmethod
    def from_dict(cls, assignment: Mapping[int, int]) -> "Restriction":
        return cls(tuple(assignment.items()))

    def __len__(self) -> int:
        return len(self.fixed)

    def __iter__(self):
        return iter(self.fixed)

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.fixed)

    @property
    def mask(self) -> int:
        return sum(1 << (i - 1) for i, _ in self.fixed)

    @property
    def negative_mask(self) -> int:
        return sum(1 << (i - 1) for i, v in self.fixed if v == -1)

    def extend(self, variable: int, value: int) -> "Restriction":
        return Restriction(self.fixed + ((variable, value),))

    def check(self, n: int) -> None:
        for i, _ in self.fixed:
            if i > n:
                raise InvalidInputError(f"restriction fixes x{i} but n = {n}")

    def matches(self, x) -> bool:
        return all(x[i - 1] == v for i, v in self.fixed)

    def consistent_indices(self, n: int) -> np.ndarray:
        """Boolean mask over the ``2^n`` table indices that agree with the restriction."""
        idx = np.arange(1 << n, dtype=np.int64)
        return (idx & self.mask) == self.negative_mask

    def to_list(self) -> list[list[int]]:
        return [[i, v] for i, v in self.fixed]


def index_to_point(b: int, n: int) -> np.ndarray:
    return np.array([-1 if (b >> i) & 1 else 1 for i in range(n)], dtype=np.int64)


def point_to_index(x) -> int:
    return sum(1 << i for i, xi in enumerate(x) if xi == -1)


def cube_points(n: int) -> np.ndarray:
    """All ``2^n`` points as rows of a ``(2^n, n)`` array, in table order."""
    idx = np.arange(1 << n, dtype=np.int64)[:, None]
    bits = (idx >> np.arange(n, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.int8)


# -- core operations --------------------------------------------------------

def evaluate(p: MultilinearPolynomial, x) -> float:
    """Value of ``p`` at a single point ``x`` in {-1, 1}^n."""
    x = np.asarray(x)
    if x.shape != (p.n,):
        raise InvalidInputError(f"point has {x.size} coordinates, polynomial has n = {p.n}")
    if not np.all(np.abs(x) == 1):
        raise InvalidInputError("point coordinates must be +-1")
    b = point_to_index(x)
    chars = 1 - 2 * (popcount(p.masks & b) & 1)
    return float(np.dot(p.values, chars))


def evaluate_real(p: MultilinearPolynomial, X) -> np.ndarray:
    """Evaluate ``p`` at arbitrary real points (rows of ``X``), e.g. Gaussian samples."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != p.n:
        raise InvalidInputError(f"points have {X.shape[1]} coordinates, polynomial has n = {p.n}")
    out = np.zeros(X.shape[0])
    for mask, c in p.coeffs.items():
        idx = [v - 1 for v in mask_to_vars(mask)]
        out += c * np.prod(X[:, idx], axis=1) if idx else c
    return out


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform (Sylvester order) of a length-2^k vector.

    Works for float and object (exact integer) arrays. Returns a new array.
    """
    a = np.array(a)
    size = a.shape[0]
    if size & (size - 1):
        raise InvalidInputError("length must be a power of two")
    h = 1
    while h < size:
        blocks = a.reshape(-1, 2, h)
        lo, hi = blocks[:, 0, :], blocks[:, 1, :]
        a = np.stack((lo + hi, lo - hi), axis=1).reshape(size)
        h *= 2
    return a


def fwht_analyze(t: TruthTable, tol: float = 0.0) -> MultilinearPolynomial:
    """Fourier coefficients ``E[t(x) chi_S(x)]`` of a truth table.

    Coefficients with magnitude ``<= tol`` are dropped.
    """
    coeffs = fwht(t.values) / float(1 << t.n)
    nz = np.flatnonzero(np.abs(coeffs) > tol)
    degree = int(popcount(nz).max()) if nz.size else 0
    return MultilinearPolynomial.from_arrays(t.n, degree, nz, coeffs[nz])


def dense_coefficients(p: MultilinearPolynomial, dtype=np.float64) -> np.ndarray:
    dense = np.zeros(1 << p.n, dtype=dtype)
    if len(p):
        dense[p.masks] = p.values
    return dense


def fwht_synthesize(p: MultilinearPolynomial, limit: int | None = None) -> TruthTable:
    """Truth table of ``p``; raises :class:`ResourceLimitError` above ``limit`` variables."""
    _check_enumerable(p.n, limit)
    return TruthTable(p.n, fwht(dense_coefficients(p)))


def table_values(p: MultilinearPolynomial, limit: int | None = None) -> np.ndarray:
    return fwht_synthesize(p, limit).values


def restrict(p: MultilinearPolynomial, rho: Restriction) -> MultilinearPolynomial:
    """Substitute the fixed values of ``rho`` into ``p``.

    The result keeps dimension ``n``; its coefficient on ``S`` (disjoint from
    the fixed set F) is ``sum_{T subset F} p(S u T) * rho_T``.
    """
    rho.check(p.n)
    if not len(rho) or not len(p):
        return p
    fixed, neg = rho.mask, rho.negative_mask
    masks = p.masks
    flips = popcount(masks & neg) & 1
    contrib = p.values * (1 - 2 * flips)
    new_masks = masks & ~fixed
    uniq, inverse = np.unique(new_masks, return_inverse=True)
    summed = np.bincount(inverse, weights=contrib, minlength=uniq.size)
    return MultilinearPolynomial.from_arrays(p.n, p.degree_bound, uniq, summed)


def multiply(a: MultilinearPolynomial, b: MultilinearPolynomial) -> MultilinearPolynomial:
    """Multilinear product using ``chi_S * chi_T = chi_{S xor T}``."""
    if a.n != b.n:
        raise InvalidInputError(f"dimension mismatch: {a.n} vs {b.n}")
    degree = min(a.degree_bound + b.degree_bound, a.n)
    if not len(a) or not len(b):
        return MultilinearPolynomial(a.n, degree, {})
    masks = (a.masks[:, None] ^ b.masks[None, :]).ravel()
    prods = np.outer(a.values, b.values).ravel()
    uniq, inverse = np.unique(masks, return_inverse=True)
    summed = np.bincount(inverse, weights=prods, minlength=uniq.size)
    return MultilinearPolynomial.from_arrays(a.n, degree, uniq, summed)


def linear_combine(terms: Sequence[tuple[float, MultilinearPolynomial]]) -> MultilinearPolynomial:
    """``sum_k s_k * p_k`` coefficientwise; exact zeros are pruned."""
    if not terms:
        raise InvalidInputError("linear_combine needs at least one term")
    n = terms[0][1].n
    acc: dict[int, float] = {}
    degree = 0
    for s, poly in terms:
        if poly.n != n:
            raise InvalidInputError(f"dimension mismatch: {poly.n} vs {n}")
        degree = max(degree, poly.degree_bound)
        for m, c in poly.coeffs.items():
            acc[m] = acc.get(m, 0.0) + s * c
    return MultilinearPolynomial(n, degree, acc)


def norms(p: MultilinearPolynomial, limit: int | None = None) -> tuple[float, float]:
    """``(||p||_2, ||p||_4)``; the 2-norm is exact via Parseval, the 4-norm enumerates."""
    l2 = float(math.sqrt(np.dot(p.values, p.values)))
    vals = table_values(p, limit)
    l4 = float(np.mean(vals ** 4) ** 0.25)
    return l2, l4


def normalize_variance(p: MultilinearPolynomial) -> MultilinearPolynomial:
    """Scale ``p`` (constant term included) to unit variance."""
    var = p.variance
    if not var > 0:
        raise DegenerateInputError("cannot normalise a constant polynomial")
    return p.scale(1.0 / math.sqrt(var))


def compress(p: MultilinearPolynomial, variables: Sequence[int]) -> MultilinearPolynomial:
    """Re-index ``p`` onto ``len(variables)`` variables (``variables[j]`` becomes ``x_{j+1}``).

    ``p`` must not depend on any variable outside ``variables``.
    """
    keep = vars_to_mask(variables, p.n)
    if p.support_mask & ~keep:
        raise InvalidInputError("polynomial depends on variables outside the kept set")
    masks = p.masks
    new = np.zeros_like(masks)
    for j, v in enumerate(variables):
        new |= ((masks >> (v - 1)) & 1) << j
    return MultilinearPolynomial.from_arrays(len(variables), min(p.degree_bound, len(variables)),
                                             new, p.values)


def random_polynomial(n: int, d: int, seed, include_constant: bool = True) -> MultilinearPolynomial:
    """Gaussian coefficients on every monomial of size ``<= d`` (``1 <= |S| <= d`` when
    ``include_constant`` is false). Deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    masks = [m for k in range(0 if include_constant else 1, d + 1) for m in masks_of_degree(n, k)]
    return MultilinearPolynomial.from_arrays(n, d, masks, rng.standard_normal(len(masks)))


# -- text format ------------------------------------------------------------

def dumps_polynomial(p: MultilinearPolynomial) -> str:
    return json.dumps(p.to_dict(), indent=None)


def loads_polynomial(text: str) -> MultilinearPolynomial:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"polynomial file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidInputError("polynomial document must be a JSON object")
    return MultilinearPolynomial.from_dict(data)


def dump_polynomial(p: MultilinearPolynomial, fp: IO[str]) -> None:
    fp.write(dumps_polynomial(p) + "\n")


def load_polynomial(fp: IO[str]) -> MultilinearPolynomial:
    return loads_polynomial(fp.read())
