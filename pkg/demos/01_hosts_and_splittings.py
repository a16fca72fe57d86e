# # Hosts, trees and splittings
#
# A host here is a graph whose minimum degree sits a little above n/2, and the
# guest is a tree of bounded degree on the same number of vertices.

import numpy as np

from spreadtree import gen_bounded_tree, gen_dirac_graph, min_degree
from spreadtree.splitting import bag_tree, splitting_problems, tree_splitting

g = gen_dirac_graph(60, 0.5, 0.25, seed=1)
t = gen_bounded_tree(60, 3, seed=1)
print("min degree", min_degree(g), "needed", int(np.ceil(0.75 * 60)))
print("tree max degree", max(t.degree))

# Cut the tree into edge-disjoint subtrees of 5..20 vertices.

s = tree_splitting(t, 5)
print("piece sizes", s.sizes())
print("problems:", splitting_problems(t, s.pieces, 5) or "none")

# The bag-tree is a BFS tree over pieces that share a vertex. Node `star`
# is the singleton bag holding the pinned tree vertex.

bt = bag_tree(s, t.root)
print("BFS order", bt.order)
for i in bt.order[1:]:
    print(f"piece {i} hangs off node {bt.parent[i]} through tree vertex {bt.shared[i]}")

# Larger pieces mean fewer of them.

for m in (3, 6, 10, 15):
    print(m, tree_splitting(t, m).ell)
