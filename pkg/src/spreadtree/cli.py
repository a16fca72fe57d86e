"""Command-line front end: instance generation, pipeline runs and spread experiments.

Exit codes: 0 success, 1 validation failure, 2 precondition refusal,
3 budget exhaustion.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .graph import (
    DegenerateInputError,
    InfeasibleParametersError,
    gen_bounded_tree,
    gen_dirac_graph,
    is_valid_embedding,
    read_graph,
    read_tree,
    format_graph,
    format_tree,
)
from .pipeline import (
    BudgetError,
    PipelineConfig,
    PipelineError,
    PreconditionError,
    check_preconditions,
    derive_constants,
    format_embedding,
    run_pipeline_detailed,
)
from .spread import (
    PipelineSampler,
    QueryFormatError,
    SamplerFailureError,
    UniformInjection,
    estimate_spread,
    parse_queries,
)

SEED_ENV = "SPREADTREE_SEED"
OK, INVALID, REFUSED, EXHAUSTED = 0, 1, 2, 3


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw not in (None, "") else 0


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _fail(code: int, msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _config(args) -> PipelineConfig:
    return PipelineConfig(C=args.C, K=args.K, alpha=args.alpha, max_deg=args.max_deg,
                          max_resample=getattr(args, "max_resample", 3))


def _load(args):
    try:
        return read_graph(args.graph), read_tree(args.tree)
    except OSError as exc:
        raise _Refusal(INVALID, f"cannot read input: {exc}")
    except ValueError as exc:
        raise _Refusal(INVALID, f"malformed input: {exc}")


class _Refusal(Exception):
    def __init__(self, code, msg):
        super().__init__(msg)
        self.code = code


def cmd_gen(args) -> int:
    try:
        if args.kind == "graph":
            text = format_graph(gen_dirac_graph(args.n, args.delta_frac, args.alpha, args.seed))
        else:
            text = format_tree(gen_bounded_tree(args.n, args.max_deg, args.seed))
    except (DegenerateInputError, InfeasibleParametersError, ValueError) as exc:
        return _fail(REFUSED, str(exc))
    _emit(text, args.out)
    return OK


def cmd_embed(args) -> int:
    g, t = _load(args)
    cfg = _config(args)
    try:
        check_preconditions(g, t, cfg)
    except PreconditionError as exc:
        return _fail(REFUSED, f"precondition failed: {exc}")
    troot = t.root if args.root_tree_vertex is None else args.root_tree_vertex
    if not 0 <= troot < t.n:
        return _fail(REFUSED, f"tree vertex {troot} out of range")
    rng_seed = args.seed
    if args.root_graph_vertex is None:
        rng = np.random.default_rng(rng_seed)
        v = int(rng.integers(g.n))
        mode = "unrooted"
    else:
        rng = rng_seed
        v = args.root_graph_vertex
        mode = "rooted"
    if not 0 <= v < g.n:
        return _fail(REFUSED, f"graph vertex {v} out of range")
    try:
        plan = derive_constants(t, cfg, troot)
        run = run_pipeline_detailed(g, t, troot, v, cfg, rng, plan)
    except BudgetError as exc:
        return _fail(REFUSED, f"parameters rejected: {exc}")
    except PipelineError as exc:
        for attempt, stage, msg in exc.failures:
            print(f"attempt {attempt} failed at {stage}: {msg}", file=sys.stderr)
        return _fail(EXHAUSTED, str(exc))
    if not is_valid_embedding(t, g, run.embedding) or run.embedding[troot] != v:
        return _fail(INVALID, "pipeline produced an invalid embedding")
    meta = {"mode": mode, "seed": args.seed, "tree_root": troot, "C": cfg.C, "K": cfg.K,
            "alpha": cfg.alpha, "pieces": plan.splitting.ell, **run.metadata()}
    _emit(format_embedding(run.embedding), args.out)
    meta_path = None if args.out in (None, "-") else args.out + ".meta"
    text = "".join(f"{k} {val}\n" for k, val in meta.items())
    if meta_path:
        _emit(text, meta_path)
    else:
        sys.stderr.write(text)
    return OK


def _read_record(path) -> dict:
    rec = {}
    with open(path) as fh:
        for ln in fh:
            if ln.strip():
                k, _, val = ln.strip().partition(" ")
                rec[k] = val
    return rec


def cmd_spread(args) -> int:
    if args.trials < 1000:
        return _fail(REFUSED, "spread estimation needs --trials >= 1000")
    queries = []
    if args.queries:
        try:
            with open(args.queries) as fh:
                queries = parse_queries(fh.read())
        except QueryFormatError as exc:
            return _fail(INVALID, f"{args.queries}: {exc}")
        except OSError as exc:
            return _fail(INVALID, f"cannot read queries: {exc}")
    exclude = ()
    if args.sampler == "uniform-injection":
        if args.n is None and args.graph is None:
            return _fail(REFUSED, "uniform-injection needs --n or --graph")
        n = args.n if args.n is not None else read_graph(args.graph).n
        sampler = UniformInjection(n)
    else:
        if args.graph is None or args.tree is None:
            return _fail(REFUSED, "the pipeline sampler needs --graph and --tree")
        g, t = _load(args)
        cfg = _config(args)
        try:
            check_preconditions(g, t, cfg)
            troot = t.root if args.root_tree_vertex is None else args.root_tree_vertex
            sampler = PipelineSampler(g, t, cfg, troot, args.root_graph_vertex)
        except PreconditionError as exc:
            return _fail(REFUSED, f"precondition failed: {exc}")
        except BudgetError as exc:
            return _fail(REFUSED, f"parameters rejected: {exc}")
        if args.root_graph_vertex is not None:
            exclude = (troot,)
    for qu in queries:
        for x, y in qu.pairs:
            if not (0 <= x < sampler.shape[0] and 0 <= y < sampler.shape[1]):
                return _fail(INVALID, f"query pair {x} {y} out of range")
    try:
        report = estimate_spread(sampler, queries, args.trials, args.seed, q=args.q,
                                 exclude=exclude, workers=args.workers,
                                 max_failure_rate=args.max_failure_rate)
    except SamplerFailureError as exc:
        return _fail(EXHAUSTED, str(exc))
    record = report.format_record()
    record = f"sampler {args.sampler}\n" + record
    if args.compare:
        other = _read_record(args.compare)
        n0, c0 = int(other["codomain"]), float(other["c_hat"])
        record += f"compare_n {n0}\ncompare_c_hat {c0}\nc_hat_ratio {report.c_hat / c0}\n"
        record += f"max_prob_ratio {report.max_prob / float(other['max_prob'])}\n"
    _emit(record, args.report)
    if queries:
        if args.report not in (None, "-"):
            _emit(report.format_query_table(), args.report + ".queries.tsv")
        else:
            sys.stdout.write(report.format_query_table())
    if args.counts:
        _emit(report.format_counts_table(), args.counts)
    return OK


def _add_pipeline_flags(p) -> None:
    p.add_argument("--C", type=int, default=8, help="piece-size parameter (default 8)")
    p.add_argument("--K", type=int, default=2, help="slack parameter (default 2)")
    p.add_argument("--alpha", type=float, default=0.25, help="degree slack (default 0.25)")
    p.add_argument("--max-deg", type=int, default=3, help="tree degree bound (default 3)")
    p.add_argument("--root-tree-vertex", type=int, help="tree vertex to pin (default: the tree file's root)")
    p.add_argument("--root-graph-vertex", type=int,
                   help="host vertex for the pinned tree vertex (default: uniformly random)")


def build_parser() -> argparse.ArgumentParser:
    seed = _default_seed()
    ap = argparse.ArgumentParser(
        prog="spreadtree",
        description="Random spanning-tree embeddings in dense graphs and their spread.",
        epilog=f"Seeds default to ${SEED_ENV} (or 0). Exit codes: 0 ok, 1 invalid input or "
               "output, 2 precondition refused, 3 budget exhausted.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a host graph or a bounded-degree tree")
    gen.add_argument("kind", choices=("graph", "tree"))
    gen.add_argument("--n", type=int, required=True, help="number of vertices")
    gen.add_argument("--delta-frac", type=float, default=0.5,
                     help="graph: base degree fraction; min degree is (delta_frac + alpha) n")
    gen.add_argument("--alpha", type=float, default=0.25, help="graph: degree slack")
    gen.add_argument("--max-deg", type=int, default=3, help="tree: maximum degree")
    gen.add_argument("--seed", type=int, default=seed)
    gen.add_argument("--out", help="output file (default stdout)")
    gen.set_defaults(func=cmd_gen)

    emb = sub.add_parser("embed", help="sample one embedding of a tree into a graph")
    emb.add_argument("--graph", required=True)
    emb.add_argument("--tree", required=True)
    _add_pipeline_flags(emb)
    emb.add_argument("--seed", type=int, default=seed)
    emb.add_argument("--max-resample", type=int, default=3, help="extra attempts after a failed one")
    emb.add_argument("--out", help="embedding file; metadata goes to OUT.meta (default stdout/stderr)")
    emb.set_defaults(func=cmd_embed)

    sp = sub.add_parser("spread", help="Monte Carlo spread estimate")
    sp.add_argument("--sampler", choices=("pipeline", "uniform-injection"), default="pipeline")
    sp.add_argument("--graph")
    sp.add_argument("--tree")
    sp.add_argument("--n", type=int, help="size for uniform-injection without a graph")
    _add_pipeline_flags(sp)
    sp.add_argument("--max-resample", type=int, default=3)
    sp.add_argument("--trials", type=int, default=10_000, help="number of runs (>= 1000)")
    sp.add_argument("--queries", help="query file: a line 's' then s lines 'x y', repeated")
    sp.add_argument("--q", type=float, help="flag queries whose lower bound exceeds q^s")
    sp.add_argument("--seed", type=int, default=seed)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--max-failure-rate", type=float, default=0.05)
    sp.add_argument("--report", help="record file (default stdout); query table to REPORT.queries.tsv")
    sp.add_argument("--counts", help="write raw per-coordinate counts as TSV")
    sp.add_argument("--compare", help="earlier report at another n, for the doubling ratio")
    sp.set_defaults(func=cmd_spread)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Refusal as exc:
        return _fail(exc.code, str(exc))


if __name__ == "__main__":
    sys.exit(main())
