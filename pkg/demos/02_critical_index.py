"""
Critical index and regularity
=============================

A polynomial is regular when no single variable carries much of the total
influence. The critical index counts how many top variables must be set
aside before the rest looks regular.
"""
from ptfreg import MultilinearPolynomial, critical_index, is_l2_regular, is_tau_regular, random_polynomial

maj9 = MultilinearPolynomial.linear([1 / 3] * 9)
print("majority of 9, tau = 1/9:", is_tau_regular(maj9, 1 / 9))
print("majority of 9, tau = 0.1:", is_tau_regular(maj9, 0.1))
print("l2-regular at 1/3:", is_l2_regular(maj9, 1 / 3))

# Geometric weights never settle down: every suffix is dominated by its
# first variable, so the whole cube is "head".
geometric = MultilinearPolynomial.linear([2.0 ** -i for i in range(10)])
print("geometric weights, tau = 0.3:", critical_index(geometric, 0.3))

# A few heavy variables in front of a flat tail do settle down.
skewed = MultilinearPolynomial.linear([4.0, 2.0, 1.0] + [0.3] * 12)
for tau in (0.05, 0.1, 0.3):
    print(f"skewed linear form, tau = {tau}: critical index {critical_index(skewed, tau)}")

p = random_polynomial(12, 2, 1)
print("random quadratic, tau = 0.3:", critical_index(p, 0.3))
