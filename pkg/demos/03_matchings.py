# # Random matchings in dense bipartite graphs

import itertools
from collections import Counter

import numpy as np

from spreadtree.matchings import (
    BipartiteGraph,
    sample_perfect_matching,
    sample_star_matching,
    star_matching_problems,
)

rng = np.random.default_rng(0)

# On K_{3,3} every one of the 6 matchings should come up equally often.

h = BipartiteGraph(np.ones((3, 3), dtype=bool))
cnt = Counter(sample_perfect_matching(h, rng) for _ in range(6000))
for m in itertools.permutations(range(3)):
    print(m, cnt[m])

# A dense random host: every vertex sees at least 3/4 of the other side.

adj = rng.random((40, 40)) < 0.85
h = BipartiteGraph(adj)
print("degree fractions", h.min_degree_fractions())
counts = np.zeros((40, 40))
for _ in range(5000):
    counts[np.arange(40), sample_perfect_matching(h, rng)] += 1
print("largest edge frequency", counts.max() / 5000, "vs 1/n =", 1 / 40)

# Stars: each left vertex gets k right partners.

adj = rng.random((10, 30)) < 0.97
sm = sample_star_matching(BipartiteGraph(adj), 3, rng)
print(sm.assignment[:3])
print("problems:", star_matching_problems(BipartiteGraph(adj), sm) or "none")
