# # Colour-respecting greedy embedding
#
# Each tree vertex is placed uniformly among the free neighbours of its
# parent's image inside its colour class. On tiny hosts the law of the
# sampler can be enumerated exactly.

import itertools

from spreadtree.graph import Graph, Tree
from spreadtree.greedy import ColouredTree, exact_greedy_distribution, greedy_embed, greedy_spread_bound

k6 = Graph(6, itertools.combinations(range(6), 2))
classes = {0: [1, 2], 1: [3, 4, 5]}
ct = ColouredTree(Tree([-1, 0, 1, 2]), {1: 1, 2: 0, 3: 1})

dist = exact_greedy_distribution(k6, classes, ct, 0)
for phi, p in sorted(dist.items()):
    print(phi, p)

print(greedy_embed(k6, classes, ct, 0, seed=1))

# The coordinate probabilities against the bound 2 / (eta^2 n).

coord = {}
for phi, p in dist.items():
    for x, y in enumerate(phi[1:], start=1):
        coord[(x, y)] = coord.get((x, y), 0) + p
eta = min(2 / 6, 1 - 1 / 2, 3 / 6, 1 - 2 / 3)
print("max", float(max(coord.values())), "bound", greedy_spread_bound(eta, 6))
