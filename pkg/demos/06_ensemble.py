"""
Many far-apart PTFs
===================

Random +-1 coefficients on every degree-d monomial give sign functions that
are pairwise far apart.
"""
import numpy as np

from ptfreg import ensemble_experiment

res = ensemble_experiment(16, 10, 2, seed=7)
off = res.distances[np.triu_indices(res.M, k=1)]
print("min distance", off.min(), "median", np.median(off), "floor C^-d", res.distance_floor)
print("constant terms of products (first row)", res.chat_empty[0, :6])
print("product variances (first row)", res.variances[0, :6])
print("fractions meeting the bias/variance thresholds", res.threshold_fractions())
