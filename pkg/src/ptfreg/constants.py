"""Configurable home for the unspecified constants of the theory.

Every asymptotic statement the package instantiates (critical index budgets,
rounding granularity, anti-concentration thresholds) reads its hidden constant
from a :class:`TheoryConstants` instance so runs are reproducible and every
report can embed the exact values it used.
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from typing import Optional

from .errors import InvalidInputError

ENUM_LIMIT_ENV = "PTFREG_ENUM_LIMIT"


def _default_enumeration_limit() -> int:
    raw = os.environ.get(ENUM_LIMIT_ENV)
    if raw is None:
        return 20
    try:
        value = int(raw)
    except ValueError as exc:
        raise InvalidInputError(f"{ENUM_LIMIT_ENV}={raw!r} is not an integer") from exc
    return value


@dataclass(frozen=True)
class TheoryConstants:
    """Constants hidden inside O(.), Omega(.) and Theta(.) of the analysis.

    Attributes
    ----------
    c0 : float
        Weak anti-concentration constant; ``Pr[p > c0^-d ||p||_2] > c0^-d``.
    c_prime : float
        Constant in ``tau' = tau * (C' d ln d ln(1/tau))^d``.
    k_granularity : float
        ``K`` in the rounding granularity ``alpha = tau / (K n ln(4/eps))^(d/2)``.
    theta : float
        Theta(1) factor in ``tau = (theta * eps / d)^(8d)``; also the factor in
        the dominant-constant threshold ``(theta ln(1/eps))^(d/2)``.
    alpha_mult : float
        Multiplier of ``d ln ln(1/beta) + d ln d + d``.
    theta_dfn2 : float
        Factor in ``Theta(log 1/beta)`` of the good-restriction tail condition.
    weight_exponent : float
        ``w`` in the reported weight bound ``n^d (d/eps)^(w d)``.
    depth_exponent : float
        ``a`` in the reported depth bound ``(1/tau) (d ln(1/tau))^(a d)``.
    concentration_b : float
        ``b`` in the informational tail bound ``exp(-b t^(2/d))``.
    regular_anticoncentration_const : float
        Leading constant of the informational bound ``const * d * tau^(1/(8d))``.
    depth_budget_override : int or None
        When set, replaces the derived total depth budget.
    enumeration_limit : int
        Largest number of variables enumerated exhaustively.
    mc_samples : int
        Sample count for Monte Carlo fallbacks.
    """

    c0: float = 3.0
    c_prime: float = 3.0
    k_granularity: float = 16.0
    theta: float = 1.0
    alpha_mult: float = 1.0
    theta_dfn2: float = 1.0
    weight_exponent: float = 4.0
    depth_exponent: float = 10.0
    concentration_b: float = 1.0
    regular_anticoncentration_const: float = 10.0
    depth_budget_override: Optional[int] = None
    enumeration_limit: int = dataclasses.field(default_factory=_default_enumeration_limit)
    mc_samples: int = 100_000

    def __post_init__(self):
        if self.c0 <= 1:
            raise InvalidInputError("c0 must exceed 1")
        for name in ("c_prime", "k_granularity", "theta", "alpha_mult", "theta_dfn2",
                     "weight_exponent", "depth_exponent", "concentration_b", "regular_anticoncentration_const"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive")
        if self.depth_budget_override is not None and self.depth_budget_override < 0:
            raise InvalidInputError("depth_budget_override must be nonnegative")
        if not 1 <= self.enumeration_limit <= 30:
            raise InvalidInputError("enumeration_limit must lie in [1, 30]")
        if self.mc_samples < 1:
            raise InvalidInputError("mc_samples must be positive")

    @property
    def c(self) -> float:
        """``C = c0**2``."""
        return self.c0 ** 2

    def replace(self, **changes) -> "TheoryConstants":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["c"] = self.c
        return out

    @classmethod
    def from_overrides(cls, overrides: dict[str, str]) -> "TheoryConstants":
        """Build from ``NAME=VALUE`` strings, coercing to each field's type."""
        fields = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for name, raw in overrides.items():
            if name not in fields:
                raise InvalidInputError(f"unknown constant {name!r}")
            if name in ("depth_budget_override",):
                kwargs[name] = None if raw.lower() in ("none", "") else int(raw)
            elif name in ("enumeration_limit", "mc_samples"):
                kwargs[name] = int(raw)
            else:
                kwargs[name] = float(raw)
        return cls(**kwargs)
