"""
Decomposing a PTF into a decision tree
======================================

Branching on influential variables until every leaf is either regular or
nearly constant.
"""
from ptfreg import build_tree, good_restriction_census, path_mass, random_polynomial

p = random_polynomial(10, 2, 7)
tree = build_tree(p, 0.1)
report = path_mass(tree)
print("depth", tree.depth)
print("leaf counts", report.counts)
print("mass per class", report.masses)
print("stage parameters", tree.params.to_dict())

# every input reaches exactly one leaf, whose polynomial agrees in sign with p there
x = [1, -1, 1, 1, -1, -1, 1, 1, -1, 1]
leaf = tree.route(x)
print("point", x, "lands in a", leaf.kind.value, "leaf fixing", leaf.restriction.to_list())

# with a generous tau the root is already regular
print([leaf.kind for leaf in build_tree(p, 0.45).leaves()][:3])

# The census view: which head assignments leave a nearly constant function?
census = good_restriction_census(p, 4, 0.1)
print("good fraction", census.good_fraction, "target", census.target_fraction)
