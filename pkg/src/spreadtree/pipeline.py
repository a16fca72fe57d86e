"""End-to-end random spanning embedding of a bounded-degree tree into a dense graph.

One attempt runs four stages:

1. ``partition``: random labelled partition of ``V(G) - v`` with one part per
   piece of a tree-splitting (plus optional slack parts), its good-pair
   auxiliary graph, the core, and the root node ``{v}``;
2. ``bag-tree``: random colour-respecting greedy embedding ``psi`` of the
   bag-tree into the core;
3. ``adjust``: the vertices outside the used parts are dealt out to the used
   parts by a random K_{1,K} star matching, giving bags of size ``|piece| - 1``;
4. ``subtrees``: every piece is embedded into its bag, in bag-tree BFS order,
   with its already embedded vertex as the pinned root.

Any stage failure discards the whole attempt and starts again from stage 1.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, Tree, as_rng, meets, min_degree
from .greedy import ColouredTree, GreedyEmbeddingError, greedy_embed
from .matchings import BipartiteGraph, MatchingError, sample_star_matching
from .partition import (
    ROOT,
    CoreExtractionError,
    LabelledPartition,
    PartitionSpec,
    attach_root,
    build_aux_graph,
    extension_ok,
    extract_core,
    sample_partition,
)
from .rooted import EmbeddingNotFound, embed_rooted_tree_randomized
from .splitting import BagTree, TreeSplitting, bag_tree, tree_splitting


class PreconditionError(ValueError):
    """The host or tree violates the hypotheses the sampler is built for."""


class BudgetError(ValueError):
    """The size profile does not fit into the host graph."""


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class PipelineError(RuntimeError):
    """Every attempt failed; ``failures`` lists ``(attempt, stage, message)``."""

    def __init__(self, failures: list):
        last = failures[-1][1] if failures else "none"
        super().__init__(f"all {len(failures)} attempts failed (last stage: {last})")
        self.failures = failures
        self.stage = last


@dataclass(frozen=True)
class PipelineConfig:
    C: int = 8
    K: int = 2
    alpha: float = 0.25
    max_deg: int = 3
    c_star: float | None = None
    eps: float = 0.15
    gamma: float = 0.15
    eta: float | None = None
    max_resample: int = 3
    search_budget: int = 10 ** 7
    star_degree: float = 0.99
    sub_degree: float = 0.75

    def __post_init__(self):
        if not self.C >= self.K >= 1:
            raise ValueError("need C >= K >= 1")
        if not 0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 1/2)")
        if self.max_deg < 2:
            raise ValueError("max_deg must be at least 2")

    @property
    def bag_frac(self) -> float:
        return 0.5 + self.alpha / 3

    @property
    def good_frac(self) -> float:
        return 0.5 + self.alpha / 2


@dataclass(frozen=True)
class PieceTree:
    """A splitting piece relabelled to ``0..k-1`` and rooted at its pre-embedded vertex."""

    vertices: tuple
    tree: Tree

    @property
    def root(self) -> int:
        return self.tree.root


@dataclass(frozen=True)
class Plan:
    """Everything about a run that depends on the tree only."""

    splitting: TreeSplitting
    bagtree: BagTree
    colouring: dict  # piece index -> colour (piece size)
    spec: PartitionSpec
    pieces: tuple
    troot: int


def derive_constants(t: Tree, cfg: PipelineConfig, troot: int | None = None) -> Plan:
    """Splitting, bag-tree, colouring and the partition size profile for ``t``.

    Part sizes are ``a_c = c - 1 - K``; part counts are the number of pieces of
    size ``c`` plus ``floor(eta n)`` slack parts, with ``eta = K / (32 C^3)``
    unless overridden.
    """
    troot = t.root if troot is None else troot
    n = t.n
    splitting = tree_splitting(t, min(cfg.C, n))
    bt = bag_tree(splitting, troot)
    colouring = {i: len(p) for i, p in enumerate(splitting.pieces)}
    if cfg.eta is None:
        eta = cfg.K / (32 * cfg.C ** 3)
        extra = (cfg.K * n) // (32 * cfg.C ** 3)
    else:
        eta = cfg.eta
        extra = int(np.floor(cfg.eta * n + 1e-9))
    colours = sorted(set(range(cfg.C, 4 * cfg.C + 1)) | set(colouring.values()))
    sizes, counts = {}, {}
    for c in colours:
        b = sum(1 for col in colouring.values() if col == c) + extra
        a = c - 1 - cfg.K
        if b == 0:
            continue
        if a < 1:
            raise BudgetError(f"colour {c} gives part size {a} < 1; need C >= K + 2 and larger pieces")
        sizes[c], counts[c] = a, b
    total = sum(sizes[c] * counts[c] for c in sizes)
    if total >= n:
        raise BudgetError(f"parts need {total} vertices but only {n - 1} are available")
    spec = PartitionSpec(cfg.C, cfg.K + 1, sizes, counts, 0.5, cfg.alpha, cfg.eps, cfg.gamma, eta)

    pieces = []
    for i, piece in enumerate(splitting.pieces):
        verts = tuple(sorted(piece))
        local = {x: k for k, x in enumerate(verts)}
        edges = [(local[p], local[x]) for p, x in t.edges() if p in piece and x in piece]
        root = local[bt.shared[i]]
        pieces.append(PieceTree(verts, Tree.from_edges(len(verts), edges, root)))
    return Plan(splitting, bt, colouring, spec, tuple(pieces), troot)


@dataclass(frozen=True)
class AdjustedPartition:
    """Bags ``M = R + L`` for the parts used by ``psi``, keyed by part label."""

    bags: dict
    realloc: dict


def _bag_neighbours(bt: BagTree, i: int) -> list[int]:
    out = [j for j, p in enumerate(bt.parent) if p == i]
    if bt.parent[i] not in (-1, bt.star):
        out.append(bt.parent[i])
    return out


def adjust_bags(g: Graph, part: LabelledPartition, bt: BagTree, psi: dict, k: int,
                alpha: float, seed=None, star_degree: float = 0.99,
                sub_degree: float = 0.75) -> AdjustedPartition:
    """Grow every part used by ``psi`` by ``k`` vertices taken from outside the used parts.

    A vertex ``b`` may join part ``R`` when ``G[R' + b]`` keeps relative minimum
    degree ``1/2 + alpha/2`` for ``R`` and every bag-tree neighbour ``R'`` of ``R``
    (other than the root singleton). The assignment is a random K_{1,k} star
    matching of that bipartite graph.
    """
    rng = as_rng(seed)
    nodes = [i for i in bt.order if i != bt.star]
    used = [psi[i] for i in nodes]
    taken = {u for lab in used for u in part.parts[lab]}
    pool = [u for u in range(g.n) if u != part.root and u not in taken]
    if len(pool) != k * len(used):
        raise StageError("adjust", f"pool of {len(pool)} vertices is not k |A| = {k * len(used)}")
    frac = 0.5 + alpha / 2
    ok = {lab: extension_ok(g, part.parts[lab], frac)[pool] for lab in used}
    H = np.ones((len(used), len(pool)), dtype=bool)
    for a, i in enumerate(nodes):
        H[a] &= ok[psi[i]]
        for j in _bag_neighbours(bt, i):
            H[a] &= ok[psi[j]]
    h = BipartiteGraph(H, tuple(used), tuple(pool))
    left, right = h.min_degree_fractions()
    if not (meets(left * len(pool), star_degree, len(pool))
            and meets(right * len(used), star_degree, len(used))):
        raise StageError("adjust", f"reallocation graph too sparse (degree fractions {left:.2f}, {right:.2f})")
    try:
        sm = sample_star_matching(h, k, rng, sub_degree=sub_degree)
    except MatchingError as exc:
        raise StageError("adjust", str(exc)) from exc
    bags, realloc = {}, {}
    for a, lab in enumerate(used):
        L = tuple(sorted(pool[j] for j in sm.assignment[a]))
        realloc[lab] = L
        bags[lab] = tuple(sorted(part.parts[lab] + L))
    return AdjustedPartition(bags, realloc)


def adjusted_problems(g: Graph, part: LabelledPartition, bt: BagTree, psi: dict,
                      adjusted: AdjustedPartition, alpha: float) -> list[str]:
    """Violations of the bag conditions C1 (size), C2 (density) and C3 (neighbour density)."""
    frac = 0.5 + alpha / 3
    problems = []
    seen: set = set()
    bag_of = {i: adjusted.bags[psi[i]] for i in range(bt.size) if i != bt.star}
    bag_of[bt.star] = (part.root,)
    for i in range(bt.size):
        if i == bt.star:
            continue
        M = bag_of[i]
        lab = psi[i]
        if len(M) != lab[0] - 1:
            problems.append(f"C1: bag {lab} has size {len(M)}, expected {lab[0] - 1}")
        if not set(part.parts[lab]) <= set(M):
            problems.append(f"bag {lab} lost vertices of its part")
        if seen & set(M):
            problems.append(f"bag {lab} overlaps another bag")
        seen |= set(M)
        sub = g.adj[np.ix_(M, M)].sum(axis=1)
        if not meets(sub.min(), frac, len(M)):
            problems.append(f"C2: bag {lab} too sparse")
    for i, p in enumerate(bt.parent):
        if p == -1:
            continue
        for x_node, y_node in ((i, p), (p, i)):
            if y_node == bt.star:
                continue
            ext = extension_ok(g, bag_of[y_node], frac)
            if not ext[list(bag_of[x_node])].all():
                problems.append(f"C3: bag of node {y_node} does not absorb bag of node {x_node}")
    return problems


@dataclass
class PipelineRun:
    embedding: dict
    attempts: int
    failures: list
    timings: dict
    partition: LabelledPartition | None = None
    psi: dict | None = None
    adjusted: AdjustedPartition | None = None
    plan: Plan | None = None
    v: int = -1

    def metadata(self) -> dict:
        meta = {"attempts": self.attempts, "failures": len(self.failures), "root_image": self.v}
        for stage, secs in self.timings.items():
            meta[f"time_{stage}"] = round(secs, 6)
        for k, (attempt, stage, _) in enumerate(self.failures):
            meta[f"failure_{k}"] = f"attempt {attempt} at {stage}"
        return meta


def check_preconditions(g: Graph, t: Tree, cfg: PipelineConfig) -> None:
    if g.n != t.n:
        raise PreconditionError(f"tree has {t.n} vertices, graph has {g.n}")
    need = (0.5 + cfg.alpha) * g.n
    # a lone vertex has nothing to be adjacent to
    if g.n > 1 and not meets(min_degree(g), 0.5 + cfg.alpha, g.n):
        raise PreconditionError(f"minimum degree {min_degree(g)} < (1/2 + alpha) n = {need:.2f}")
    if max(t.degree) > cfg.max_deg:
        raise PreconditionError(f"tree has maximum degree {max(t.degree)} > {cfg.max_deg}")


def _attempt(g: Graph, plan: Plan, v: int, cfg: PipelineConfig, rng, timings: dict):
    clock = time.perf_counter()

    def lap(stage):
        nonlocal clock
        now = time.perf_counter()
        timings[stage] = timings.get(stage, 0.0) + now - clock
        clock = now

    bt = plan.bagtree
    part = sample_partition(g, plan.spec, v, rng)
    aux = build_aux_graph(g, part, 0.5, cfg.alpha)
    try:
        core = extract_core(aux, cfg.eps)
    except CoreExtractionError as exc:
        raise StageError("partition", str(exc)) from exc
    core = attach_root(core, g, v, 0.5, cfg.alpha)
    lap("partition")

    classes: dict = {c: [] for c in plan.colouring.values()}
    for i, lab in enumerate(core.labels):
        if lab != ROOT:
            classes.setdefault(lab[0], []).append(i)
    ct = ColouredTree(bt.as_tree(), {i: plan.colouring[i] for i in range(bt.star)})
    try:
        image = greedy_embed(core.as_graph(), classes, ct, len(core.labels) - 1, rng)
    except GreedyEmbeddingError as exc:
        raise StageError("bag-tree", str(exc)) from exc
    psi = {i: core.labels[j] for i, j in image.items()}
    lap("bag-tree")

    adjusted = adjust_bags(g, part, bt, psi, cfg.K, cfg.alpha, rng, cfg.star_degree, cfg.sub_degree)
    problems = adjusted_problems(g, part, bt, psi, adjusted, cfg.alpha)
    if problems:
        raise StageError("adjust", problems[0])
    lap("adjust")

    phi = {plan.troot: v}
    for i in bt.order[1:]:
        piece = plan.pieces[i]
        anchor = piece.vertices[piece.root]
        try:
            local = embed_rooted_tree_randomized(
                g, adjusted.bags[psi[i]], piece.tree, piece.root, phi[anchor], rng,
                budget=cfg.search_budget,
            )
        except EmbeddingNotFound as exc:
            raise StageError("subtrees", f"piece {i}: {exc}") from exc
        for x, y in local.items():
            phi[piece.vertices[x]] = y
    lap("subtrees")
    return phi, part, psi, adjusted


def run_pipeline_detailed(g: Graph, t: Tree, troot: int, v: int, cfg: PipelineConfig,
                          seed=None, plan: Plan | None = None) -> PipelineRun:
    """Like :func:`run_pipeline` but returns the run record with all intermediate objects."""
    check_preconditions(g, t, cfg)
    if not 0 <= v < g.n:
        raise ValueError(f"graph vertex {v} out of range")
    if t.n == 1:
        return PipelineRun({troot: v}, 1, [], {}, v=v)
    if plan is None or plan.troot != troot:
        plan = derive_constants(t, cfg, troot)
    rng = as_rng(seed)
    timings: dict = {}
    failures = []
    for attempt in range(1, cfg.max_resample + 2):
        try:
            phi, part, psi, adjusted = _attempt(g, plan, v, cfg, rng, timings)
        except StageError as exc:
            failures.append((attempt, exc.stage, str(exc)))
            continue
        return PipelineRun(phi, attempt, failures, timings, part, psi, adjusted, plan, v)
    raise PipelineError(failures)


def run_pipeline(g: Graph, t: Tree, troot: int, v: int, cfg: PipelineConfig,
                 seed=None, plan: Plan | None = None) -> dict:
    """Random spanning embedding of ``t`` into ``g`` with ``troot -> v``.

    Makes at most ``1 + cfg.max_resample`` attempts and raises
    :class:`PipelineError` if none succeeds.
    """
    return run_pipeline_detailed(g, t, troot, v, cfg, seed, plan).embedding


def embed_unrooted(g: Graph, t: Tree, cfg: PipelineConfig, seed=None,
                   plan: Plan | None = None) -> dict:
    """Pin the tree root to a uniformly random host vertex, then run the rooted sampler."""
    rng = as_rng(seed)
    v = int(rng.integers(g.n))
    return run_pipeline(g, t, t.root if plan is None else plan.troot, v, cfg, rng, plan)


def native_atom(splitting: TreeSplitting, order, y: int) -> int:
    """Index of the first piece, in embedding order, that contains tree vertex ``y``."""
    for i in order:
        if i < splitting.ell and y in splitting.pieces[i]:
            return i
    raise ValueError(f"tree vertex {y} is in no piece")


def format_embedding(phi: dict) -> str:
    return "".join(f"{x} {phi[x]}\n" for x in sorted(phi))


def parse_embedding(text: str) -> dict:
    phi = {}
    for lineno, ln in enumerate(text.splitlines(), start=1):
        if not ln.strip():
            continue
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'tree_vertex graph_vertex'")
        phi[int(parts[0])] = int(parts[1])
    return phi
