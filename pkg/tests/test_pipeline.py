import itertools

import numpy as np
import pytest

from spreadtree.graph import Graph, Tree, gen_bounded_tree, gen_dirac_graph, is_valid_embedding
from spreadtree.pipeline import (
    BudgetError,
    PipelineConfig,
    PipelineError,
    PreconditionError,
    derive_constants,
    embed_unrooted,
    format_embedding,
    native_atom,
    parse_embedding,
    run_pipeline,
    run_pipeline_detailed,
    adjusted_problems,
)
from spreadtree.splitting import TreeSplitting
from spreadtree.spread import chi_square_uniform

from desk import ALPHA, DESK, HOST_DELTA_FRAC, MAX_DEG, desk_instance


def check_run(g, t, troot, v, run):
    phi = run.embedding
    assert phi[troot] == v
    assert is_valid_embedding(t, g, phi)
    plan = run.plan
    if t.n == 1:
        return
    assert not adjusted_problems(g, run.partition, plan.bagtree, run.psi, run.adjusted, ALPHA)
    order = plan.bagtree.order
    for y in range(t.n):
        if y == troot:
            continue
        i = native_atom(plan.splitting, order, y)
        assert phi[y] in run.adjusted.bags[run.psi[i]]


def test_path_tree_at_forty():
    n = 40
    g = gen_dirac_graph(n, HOST_DELTA_FRAC, ALPHA, seed=1)
    t = Tree([-1] + list(range(n - 1)))
    run = run_pipeline_detailed(g, t, 0, 7, DESK, seed=3)
    check_run(g, t, 0, 7, run)


def test_single_vertex():
    g = Graph(1)
    cfg = PipelineConfig(alpha=0.25)
    assert run_pipeline(g, Tree([-1]), 0, 0, cfg, seed=0) == {0: 0}


@pytest.mark.parametrize("n", [40, 80])
def test_first_attempt_success_rate(n):
    first, runs = 0, 100
    for s in range(runs):
        g, t = desk_instance(n, s)
        run = run_pipeline_detailed(g, t, t.root, s % n, DESK, seed=s)
        check_run(g, t, t.root, s % n, run)
        first += run.attempts == 1
    assert first / runs >= 0.99


def test_derive_constants_examples():
    cfg = PipelineConfig(C=3, K=1)
    n = 1000
    plan = derive_constants(gen_bounded_tree(n, 3, seed=1), cfg)
    spec = plan.spec
    c = cfg.C + 5
    assert spec.sizes[c] == cfg.C + 4 - cfg.K
    used = set(plan.colouring.values())
    empty = [c for c in range(cfg.C, 4 * cfg.C + 1) if c not in used]
    assert empty
    for c in empty:
        assert spec.counts[c] == (cfg.K * n) // (32 * cfg.C ** 3)
    for c in used:
        pieces = sum(1 for col in plan.colouring.values() if col == c)
        assert spec.counts[c] == pieces + (cfg.K * n) // (32 * cfg.C ** 3)
    assert sum(spec.sizes[c] * spec.counts[c] for c in spec.sizes) < n
    assert spec.eta == pytest.approx(cfg.K / (32 * cfg.C ** 3))


def test_budget_recheck_on_accepted_configs():
    rng = np.random.default_rng(0)
    accepted = 0
    for _ in range(60):
        n = int(rng.integers(20, 400))
        cfg = PipelineConfig(C=int(rng.integers(3, 17)), K=int(rng.integers(1, 3)))
        try:
            spec = derive_constants(gen_bounded_tree(n, 3, seed=rng), cfg).spec
        except BudgetError:
            continue
        accepted += 1
        assert sum(spec.sizes[c] * spec.counts[c] for c in spec.sizes) < n
    assert accepted >= 20


def test_budget_error_when_parts_are_too_small():
    with pytest.raises(BudgetError):
        derive_constants(gen_bounded_tree(30, 3, seed=0), PipelineConfig(C=2, K=1))


def test_native_atom_examples():
    t = Tree([-1, 0, 1, 2, 3])
    pieces = (frozenset({0, 1}), frozenset({1, 2}), frozenset({2, 3, 4}))
    s = TreeSplitting(t, pieces)
    assert native_atom(s, [0, 1, 2], 4) == 2
    assert native_atom(s, [2, 1, 0], 2) == 2
    assert native_atom(s, [0, 1, 2], 2) == 1
    assert native_atom(s, [1, 0, 2], 1) == 1
    with pytest.raises(ValueError):
        native_atom(s, [0, 1, 2], 9)


def test_determinism_and_metadata():
    g, t = desk_instance(80, 5)
    a = run_pipeline_detailed(g, t, t.root, 3, DESK, seed=11)
    b = run_pipeline_detailed(g, t, t.root, 3, DESK, seed=11)
    assert a.embedding == b.embedding
    meta = a.metadata()
    assert meta["attempts"] == a.attempts and meta["root_image"] == 3
    assert any(k.startswith("time_") for k in meta)
    assert embed_unrooted(g, t, DESK, seed=4) == embed_unrooted(g, t, DESK, seed=4)


def test_non_root_tree_vertex_can_be_pinned():
    g, t = desk_instance(80, 2)
    troot = 17
    run = run_pipeline_detailed(g, t, troot, 50, DESK, seed=0)
    check_run(g, t, troot, 50, run)


def test_preconditions_refused():
    g = gen_dirac_graph(40, 0.3, 0.1, seed=0)
    t = gen_bounded_tree(40, 3, seed=0)
    with pytest.raises(PreconditionError):
        run_pipeline(g, t, 0, 0, DESK, seed=0)
    g, _ = desk_instance(40, 0)
    with pytest.raises(PreconditionError):
        run_pipeline(g, gen_bounded_tree(40, 5, seed=0).rerooted(0), 0, 0,
                     PipelineConfig(C=16, max_deg=2), seed=0)
    with pytest.raises(PreconditionError):
        run_pipeline(g, gen_bounded_tree(39, 3, seed=0), 0, 0, DESK, seed=0)


def test_exhausted_resamples_report_stage():
    # C=8 leaves parts of five vertices, which fail the density test on this host
    g = gen_dirac_graph(80, 0.5, ALPHA, seed=0)
    t = gen_bounded_tree(80, MAX_DEG, seed=0)
    with pytest.raises(PipelineError) as info:
        run_pipeline(g, t, 0, 0, PipelineConfig(max_resample=1), seed=0)
    assert len(info.value.failures) == 2
    assert info.value.stage in {"partition", "bag-tree", "adjust", "subtrees"}


def test_unrooted_root_image_is_uniform():
    n, runs = 20, 10_000
    g, t = desk_instance(n, 0)
    plan = derive_constants(t, DESK)
    rng = np.random.default_rng(8)
    counts = np.zeros(n, dtype=int)
    for _ in range(runs):
        phi = embed_unrooted(g, t, DESK, rng, plan)
        counts[phi[t.root]] += 1
    assert chi_square_uniform(counts)[1] >= 0.01
    assert is_valid_embedding(t, g, embed_unrooted(g, t, DESK, 1, plan))


def test_embedding_text_round_trip():
    phi = {0: 5, 2: 1, 1: 0}
    text = format_embedding(phi)
    assert text == "0 5\n1 0\n2 1\n"
    assert parse_embedding(text) == phi
    with pytest.raises(ValueError):
        parse_embedding("0 1 2\n")
