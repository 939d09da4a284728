"""
Checking moment and anti-concentration bounds by enumeration
============================================================
"""
from ptfreg import (
    MultilinearPolynomial,
    anticoncentration_check,
    concentration_profile,
    gaussian_invariance_gap,
    hypercontractivity_check,
    random_polynomial,
)

p = random_polynomial(10, 3, 0)
print(hypercontractivity_check(p).to_dict())

zero_mean = random_polynomial(10, 3, 0, include_constant=False)
print(anticoncentration_check(zero_mean).to_dict())

maj9 = MultilinearPolynomial.linear([1 / 3] * 9)
print(concentration_profile(maj9, [2.8, 4.0, 8.0]).details["tails"])

# Boolean versus Gaussian inputs for a dictator and for a spread-out sum
for q in (MultilinearPolynomial.character(1, (1,)), maj9):
    rep = gaussian_invariance_gap(q, 100_000, seed=1)
    print(f"gap {rep.measured:.4f} +- {rep.details['dkw_band']:.4f}")
