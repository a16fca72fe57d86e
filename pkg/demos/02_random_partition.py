# # The random labelled partition
#
# Parts are consecutive blocks of a uniform permutation of V(G) - v.

from collections import Counter

from spreadtree import PipelineConfig, gen_bounded_tree, gen_dirac_graph
from spreadtree.pipeline import derive_constants
from spreadtree.partition import (
    build_aux_graph,
    extract_core,
    format_stats,
    partition_stats,
    sample_partition,
)

n = 200
g = gen_dirac_graph(n, 0.5, 0.25, seed=3)
plan = derive_constants(gen_bounded_tree(n, 3, seed=3), PipelineConfig(C=8, K=2))
spec = plan.spec
print("part sizes", spec.sizes)
print("part counts", spec.counts)

part = sample_partition(g, spec, 0, seed=4)
print(len(part.parts), "parts,", len(part.leftover), "leftover vertices")

# How often does vertex 1 land in part (8, 0)? Exchangeability says a_c / (n - 1).

hits = Counter()
draws = 2000
for s in range(draws):
    hits[sample_partition(g, spec, 0, seed=s).owner().get(1)] += 1
print("observed", hits[(8, 0)] / draws, "expected", spec.sizes[8] / (n - 1))

# Good pairs and the core. With parts of 5 vertices the density test is
# harsh, so many parts drop out; larger C helps a lot.

aux = build_aux_graph(g, part, 0.5, 0.25)
print("good parts", int(aux.good.sum()), "of", len(aux.labels))
print("aux edges", int(aux.adj.sum()) // 2)
try:
    core = extract_core(aux, 0.15)
    print("core keeps", len(core.labels))
except Exception as exc:
    print("no core on this draw:", exc)

# The first lines of the statistics record; the X_* entries that follow
# count good-pair candidates per part and colour.

print("".join(format_stats(partition_stats(g, part, 0.5, 0.25)).splitlines(True)[:11]))
