# # End to end
#
# Pieces of 16..64 vertices on hosts with minimum degree about 0.92 n. The
# library default C=8 gives 5-vertex parts, which rarely pass the density
# tests at this size.

from spreadtree import gen_bounded_tree, gen_dirac_graph, is_valid_embedding
from spreadtree.pipeline import PipelineConfig, adjusted_problems, embed_unrooted, run_pipeline_detailed

cfg = PipelineConfig(C=16, K=2, alpha=0.25, max_deg=3)
g = gen_dirac_graph(120, 0.67, 0.25, seed=2)
t = gen_bounded_tree(120, 3, seed=2)

run = run_pipeline_detailed(g, t, t.root, 7, cfg, seed=0)
print("valid", is_valid_embedding(t, g, run.embedding), "root ->", run.embedding[t.root])
print(run.metadata())
print("pieces", run.plan.splitting.sizes())
print("bag problems:", adjusted_problems(g, run.partition, run.plan.bagtree, run.psi, run.adjusted, 0.25) or "none")

for i in run.plan.bagtree.order[1:]:
    lab = run.psi[i]
    print(f"piece {i}: part {lab}, reallocated {len(run.adjusted.realloc[lab])} vertices")

# Unrooted: the root image is drawn uniformly first.

phi = embed_unrooted(g, t, cfg, seed=5)
print("unrooted root image", phi[t.root])

# With C=8 and a sparser host the run gives up after its resamples.

try:
    run_pipeline_detailed(gen_dirac_graph(80, 0.5, 0.25, seed=0), gen_bounded_tree(80, 3, seed=0),
                          0, 0, PipelineConfig(), seed=0)
except Exception as exc:
    print(type(exc).__name__, exc)
