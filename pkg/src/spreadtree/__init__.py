"""Random spanning embeddings of bounded-degree trees into dense graphs, with spread diagnostics."""

from .graph import (
    DegenerateInputError,
    Graph,
    IncompleteEmbeddingError,
    InfeasibleParametersError,
    Tree,
    gen_bounded_tree,
    gen_dirac_graph,
    is_valid_embedding,
    min_degree,
)
from .pipeline import (
    PipelineConfig,
    PipelineError,
    PreconditionError,
    embed_unrooted,
    run_pipeline,
    run_pipeline_detailed,
)
from .rooted import EmbeddingNotFound, embed_rooted_tree, embed_rooted_tree_randomized
from .splitting import bag_tree, tree_splitting
from .spread import SpreadQuery, SpreadReport, estimate_spread

__version__ = "0.1.0"
