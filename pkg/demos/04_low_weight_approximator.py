"""
Integer approximators of small weight
=====================================

Rounding each regular leaf onto a coarse lattice and gluing the leaves
together with path indicators gives one integer polynomial Q whose sign is
close to sign(p).
"""
import math

from ptfreg import TheoryConstants, approximate, random_polynomial

p = random_polynomial(10, 2, 3)
cert = approximate(p, 0.2)
print("distance", cert.distance, "weight", cert.weight, "tree depth", cert.tree_depth)
print("leaf counts", cert.leaf_counts)

# The default constants make the regularity threshold tiny, so leaves end up
# constant. A larger theta lets whole polynomials be rounded at once.
calibrated = TheoryConstants(theta=19.0)
for n in (8, 10, 12):
    c = approximate(random_polynomial(n, 2, n), 0.2, calibrated)
    print(f"n = {n:2d}: distance {c.distance:.4f}, ln weight {math.log(c.weight):.2f}")
