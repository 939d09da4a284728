"""
Fourier expansions on the cube
==============================

Truth tables and coefficient vectors are two views of the same function.
"""
import numpy as np

from ptfreg import MultilinearPolynomial, TruthTable, fwht_analyze, fwht_synthesize, influence_profile

# AND of two bits, written out point by point. Index b has x_{i+1} = -1
# exactly when bit i of b is set, so index 0 is the all-ones point.
and2 = TruthTable(2, [1, -1, -1, -1])
p = fwht_analyze(and2)
print(p)

# going back recovers the table exactly
print(fwht_synthesize(p).values)

# Parseval: a +-1 function has unit Fourier weight
rng = np.random.default_rng(0)
f = fwht_analyze(TruthTable(8, rng.choice([-1.0, 1.0], size=256)))
print("sum of squares:", np.sum(f.values ** 2))

# influences are the Fourier weight touching each variable
maj3 = MultilinearPolynomial.from_terms(3, [((1,), .5), ((2,), .5), ((3,), .5), ((1, 2, 3), -.5)])
prof = influence_profile(maj3)
print("influences", prof.influences, "total", prof.total, "variance", prof.variance)
