# # Measuring spread
#
# Estimate P[phi(x) = y] for every coordinate and compare n * max P across
# host sizes. If the sampler is O(1/n)-spread this product stays put.

from spreadtree import PipelineConfig, gen_bounded_tree, gen_dirac_graph
from spreadtree.spread import (
    PipelineSampler,
    SpreadQuery,
    UniformInjection,
    chernoff,
    degree_into_random_set,
    doubling_diagnostic,
    estimate_spread,
    perm_spread_bound,
    perm_spread_exact,
)

cfg = PipelineConfig(C=16, K=2)

# Calibration first: a uniform injection has every marginal equal to 1/n.

rep = estimate_spread(UniformInjection(20), [SpreadQuery(((0, 1), (1, 2)))], trials=20_000, seed=0)
print(rep.format_record())
print(rep.format_query_table())

reports = {}
for n in (40, 80):
    g = gen_dirac_graph(n, 0.67, 0.25, seed=0)
    t = gen_bounded_tree(n, 3, seed=10_000)
    reports[n] = estimate_spread(PipelineSampler(g, t, cfg, v=0), trials=5000, seed=n, exclude=[t.root])
    print(n, "C_hat", round(reports[n].c_hat, 2), "CI", reports[n].c_hat_ci())
print(doubling_diagnostic(reports[40], reports[80]))

# Exact permutation probabilities and the tail bounds.

print(perm_spread_exact(6, [0, 1], [{1, 2}, {1, 2}]), perm_spread_bound(6, [{1, 2}, {1, 2}]))
print(chernoff(300, 0.1), degree_into_random_set(200, 0.75, 0.625))
