"""Measuring spread: Monte Carlo estimators, exact oracles and tail-bound calculators.

A *sampler* is any callable ``sampler(rng) -> {domain element: image}`` that
also exposes ``shape = (domain size, codomain size)``. Failed draws are
signalled by raising; they are counted, not retried.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.stats import chi2, norm

from .graph import Graph, Tree, as_rng
from .pipeline import PipelineConfig, derive_constants, run_pipeline

CHUNK = 1000
LEVEL = 0.99


class SamplerFailureError(RuntimeError):
    pass


class EnumerationBudgetError(RuntimeError):
    pass


class BoundViolation(AssertionError):
    """An exact probability came out above its proven upper bound."""


@dataclass(frozen=True)
class SpreadQuery:
    pairs: tuple

    def __post_init__(self):
        pairs = tuple((int(x), int(y)) for x, y in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs:
            raise ValueError("a query needs at least one pair")
        xs, ys = zip(*pairs)
        if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
            raise ValueError("query pairs must use distinct domain and distinct codomain elements")

    @property
    def s(self) -> int:
        return len(self.pairs)

    def hit(self, phi) -> bool:
        return all(phi.get(x) == y for x, y in self.pairs)


def wilson_interval(k, n, level: float = LEVEL):
    """Wilson score interval for ``k`` successes out of ``n``; works elementwise on arrays."""
    k = np.asarray(k, dtype=float)
    if n <= 0:
        return np.zeros_like(k), np.ones_like(k)
    z = norm.ppf(0.5 + level / 2)
    p = k / n
    den = 1 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return np.clip(mid - half, 0, 1), np.clip(mid + half, 0, 1)


# -- samplers -----------------------------------------------------------------


@dataclass
class UniformInjection:
    """Uniformly random injection of ``[n]`` into ``[m]``."""

    n: int
    m: int | None = None

    @property
    def shape(self):
        return (self.n, self.n if self.m is None else self.m)

    def __call__(self, rng) -> dict:
        ys = rng.permutation(self.shape[1])[: self.n]
        return dict(zip(range(self.n), ys.tolist()))


@dataclass
class ConstantSampler:
    phi: dict
    m: int

    @property
    def shape(self):
        return (max(self.phi) + 1, self.m)

    def __call__(self, rng) -> dict:
        return dict(self.phi)


@dataclass
class PipelineSampler:
    """Draws from the tree-embedding pipeline on a fixed instance.

    With ``v=None`` the root image is drawn uniformly per run (unrooted mode).
    """

    g: Graph
    t: Tree
    cfg: PipelineConfig
    troot: int | None = None
    v: int | None = None
    plan: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.troot is None:
            self.troot = self.t.root
        if self.plan is None:
            self.plan = derive_constants(self.t, self.cfg, self.troot)

    @property
    def shape(self):
        return (self.t.n, self.g.n)

    def __call__(self, rng) -> dict:
        v = int(rng.integers(self.g.n)) if self.v is None else self.v
        return run_pipeline(self.g, self.t, self.troot, v, self.cfg, rng, self.plan)


# -- Monte Carlo estimation -----------------------------------------------------


@dataclass
class SpreadReport:
    counts: np.ndarray          # counts[x, y] = number of successful runs with phi(x) = y
    successes: int
    failures: int
    queries: tuple = ()
    query_hits: tuple = ()
    q: float | None = None
    exclude: tuple = ()
    seed: object = None
    chunks: int = 0
    level: float = LEVEL
    ci_method: str = "wilson"

    @property
    def trials(self) -> int:
        return self.successes + self.failures

    @property
    def n(self) -> int:
        return self.counts.shape[1]

    def probabilities(self) -> np.ndarray:
        return self.counts / max(self.successes, 1)

    def _masked(self) -> np.ndarray:
        c = self.counts.copy()
        if self.exclude:
            c[list(self.exclude), :] = -1
        return c

    @property
    def argmax(self) -> tuple[int, int]:
        c = self._masked()
        x, y = np.unravel_index(int(c.argmax()), c.shape)
        return int(x), int(y)

    @property
    def max_prob(self) -> float:
        x, y = self.argmax
        return self.counts[x, y] / max(self.successes, 1)

    def max_prob_ci(self) -> tuple[float, float]:
        x, y = self.argmax
        lo, hi = wilson_interval(self.counts[x, y], self.successes, self.level)
        return float(lo), float(hi)

    @property
    def c_hat(self) -> float:
        return self.n * self.max_prob

    def c_hat_ci(self) -> tuple[float, float]:
        lo, hi = self.max_prob_ci()
        return self.n * lo, self.n * hi

    def query_rows(self) -> list[dict]:
        rows = []
        for qu, k in zip(self.queries, self.query_hits):
            lo, hi = wilson_interval(k, self.successes, self.level)
            row = {
                "pairs": ";".join(f"{x}->{y}" for x, y in qu.pairs),
                "s": qu.s,
                "hits": int(k),
                "estimate": k / max(self.successes, 1),
                "ci_low": float(lo),
                "ci_high": float(hi),
            }
            if self.q is not None:
                row["threshold"] = self.q ** qu.s
                row["flagged"] = bool(lo > self.q ** qu.s)
            rows.append(row)
        return rows

    def flagged(self) -> list[SpreadQuery]:
        return [qu for qu, row in zip(self.queries, self.query_rows()) if row.get("flagged")]

    def coordinate_flags(self) -> list[tuple[int, int]]:
        """Single coordinates whose lower confidence bound exceeds ``q``."""
        if self.q is None:
            return []
        lo, _ = wilson_interval(self._masked().clip(0), self.successes, self.level)
        return [(int(x), int(y)) for x, y in zip(*np.nonzero(lo > self.q))]

    def to_record(self) -> dict:
        lo, hi = self.c_hat_ci()
        x, y = self.argmax
        rec = {
            "trials": self.trials,
            "successes": self.successes,
            "failures": self.failures,
            "domain": self.counts.shape[0],
            "codomain": self.n,
            "max_prob": self.max_prob,
            "max_at": f"{x}->{y}",
            "c_hat": self.c_hat,
            "c_hat_low": lo,
            "c_hat_high": hi,
            "ci_method": self.ci_method,
            "ci_level": self.level,
            "seed": self.seed,
            "chunks": self.chunks,
            "queries": len(self.queries),
        }
        if self.q is not None:
            rec["q"] = self.q
            rec["flagged_queries"] = len(self.flagged())
            rec["flagged_coordinates"] = len(self.coordinate_flags())
        return rec

    def format_record(self) -> str:
        return "".join(f"{k} {v}\n" for k, v in self.to_record().items())

    def format_query_table(self) -> str:
        rows = self.query_rows()
        if not rows:
            return ""
        cols = list(rows[0])
        out = ["\t".join(cols)]
        out += ["\t".join(str(r[c]) for c in cols) for r in rows]
        return "\n".join(out) + "\n"

    def format_counts_table(self) -> str:
        """Raw ``x y count`` triples for every non-zero coordinate."""
        xs, ys = np.nonzero(self.counts)
        return "x\ty\tcount\n" + "".join(
            f"{x}\t{y}\t{self.counts[x, y]}\n" for x, y in zip(xs.tolist(), ys.tolist())
        )


def _run_chunk(sampler, seq, trials, queries, shape):
    rng = np.random.default_rng(seq)
    counts = np.zeros(shape, dtype=np.int64)
    hits = [0] * len(queries)
    fails = 0
    for _ in range(trials):
        try:
            phi = sampler(rng)
        except Exception:  # sampler failures are data here, not errors
            fails += 1
            continue
        xs = np.fromiter(phi.keys(), dtype=np.int64, count=len(phi))
        ys = np.fromiter(phi.values(), dtype=np.int64, count=len(phi))
        counts[xs, ys] += 1
        for i, qu in enumerate(queries):
            if qu.hit(phi):
                hits[i] += 1
    return counts, hits, fails


def estimate_spread(sampler: Callable, queries: Sequence = (), trials: int = 10_000, seed=0,
                    q: float | None = None, exclude: Sequence[int] = (), workers: int = 1,
                    max_failure_rate: float = 0.05, min_trials: int = 1000) -> SpreadReport:
    """Monte Carlo estimate of single-coordinate and joint image probabilities.

    Trials are cut into chunks of ``CHUNK`` runs whose seeds are spawned from
    ``seed``, so the result does not depend on ``workers``. ``exclude`` drops
    domain elements (e.g. a pinned root) from the max-probability statistics.
    """
    if trials < min_trials:
        raise ValueError(f"need at least {min_trials} trials, got {trials}")
    queries = tuple(qu if isinstance(qu, SpreadQuery) else SpreadQuery(qu) for qu in queries)
    shape = tuple(sampler.shape)
    sizes = [CHUNK] * (trials // CHUNK) + ([trials % CHUNK] if trials % CHUNK else [])
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(sampler, s, k, queries, shape) for s, k in zip(seqs, sizes)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_chunk, *zip(*jobs)))
    else:
        parts = [_run_chunk(*job) for job in jobs]
    counts = sum(p[0] for p in parts)
    hits = tuple(int(sum(p[1][i] for p in parts)) for i in range(len(queries)))
    fails = sum(p[2] for p in parts)
    if fails > max_failure_rate * trials:
        raise SamplerFailureError(f"{fails} of {trials} draws failed (limit {max_failure_rate:.0%})")
    return SpreadReport(counts, trials - fails, fails, queries, hits, q,
                        tuple(int(x) for x in exclude), seed, len(sizes))


def doubling_diagnostic(small: SpreadReport, large: SpreadReport) -> dict:
    """Compare two reports whose codomains differ by (about) a factor two."""
    return {
        "n_small": small.n,
        "n_large": large.n,
        "c_hat_small": float(small.c_hat),
        "c_hat_large": float(large.c_hat),
        "c_hat_ratio": float(large.c_hat / small.c_hat),
        "max_prob_ratio": float(large.max_prob / small.max_prob),
    }


def chi_square_uniform(counts) -> tuple[float, float]:
    """Pearson statistic and p-value of ``counts`` against the uniform law."""
    counts = np.asarray(counts, dtype=float)
    expected = counts.sum() / len(counts)
    stat = float(((counts - expected) ** 2 / expected).sum())
    return stat, float(chi2.sf(stat, len(counts) - 1))


# -- exact oracles --------------------------------------------------------------


def brute_force_embeddings(g: Graph, t: Tree, budget: int = 10 ** 6) -> list[dict]:
    """Every injective edge-preserving map from ``t`` onto ``g`` (requires ``|t| = |g|``)."""
    if t.n != g.n:
        raise ValueError(f"spanning embeddings need |T| = |G| ({t.n} vs {g.n})")
    order = t.bfs_order()
    adj = g.adj
    out: list[dict] = []
    img = [-1] * t.n
    used = [False] * g.n

    def rec(k):
        if k == t.n:
            out.append(dict(enumerate(img)))
            if len(out) > budget:
                raise EnumerationBudgetError(f"more than {budget} embeddings")
            return
        x = order[k]
        cands = range(g.n) if k == 0 else np.flatnonzero(adj[img[t.parent[x]]]).tolist()
        for y in cands:
            if not used[y]:
                used[y] = True
                img[x] = y
                rec(k + 1)
                used[y] = False
        img[x] = -1

    rec(0)
    return out


def rooted_embedding_exists(g: Graph, hostset, t: Tree, root: int, v: int) -> bool:
    """Plain exhaustive search: does ``t`` map onto ``hostset + v`` with ``root -> v``?"""
    hosts = sorted(set(int(u) for u in hostset) - {v})
    if len(hosts) + 1 != t.n:
        return False
    t = t.rerooted(root) if t.root != root else t
    order = t.bfs_order()
    img = {root: v}
    free = set(hosts)

    def rec(k):
        if k == len(order):
            return True
        x = order[k]
        p = img[t.parent[x]]
        for y in sorted(free):
            if g.adj[p, y]:
                free.remove(y)
                img[x] = y
                if rec(k + 1):
                    return True
                free.add(y)
        return False

    return rec(1)


def perm_spread_exact(n: int, xs: Sequence[int], Ls: Sequence) -> Fraction:
    """Exact ``P[pi(x_i) in L_i for all i]`` for a uniform permutation of ``[n]``, ``n <= 8``.

    Raises :class:`BoundViolation` if the value exceeds ``prod e|L_i|/n``.
    """
    xs, Ls = _check_perm_args(n, xs, Ls)
    if n > 8:
        raise ValueError(f"exact enumeration is limited to n <= 8 (got {n}); use perm_spread_estimate")
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int8)
    ok = np.ones(len(perms), dtype=bool)
    for x, L in zip(xs, Ls):
        ok &= np.isin(perms[:, x], list(L))
    p = Fraction(int(ok.sum()), len(perms))
    if p > perm_spread_bound(n, Ls):
        raise BoundViolation(f"P = {p} exceeds the bound {perm_spread_bound(n, Ls)}")
    return p


def perm_spread_estimate(n: int, xs: Sequence[int], Ls: Sequence, trials: int = 100_000,
                         seed=None) -> float:
    xs, Ls = _check_perm_args(n, xs, Ls)
    rng = as_rng(seed)
    perms = rng.permuted(np.tile(np.arange(n), (trials, 1)), axis=1)
    ok = np.ones(trials, dtype=bool)
    for x, L in zip(xs, Ls):
        ok &= np.isin(perms[:, x], list(L))
    return float(ok.mean())


def perm_spread_bound(n: int, Ls: Sequence) -> float:
    return math.prod(math.e * len(L) / n for L in Ls)


def _check_perm_args(n, xs, Ls):
    xs = [int(x) for x in xs]
    Ls = [set(int(u) for u in L) for L in Ls]
    if len(xs) != len(Ls):
        raise ValueError("xs and Ls differ in length")
    if len(set(xs)) != len(xs):
        raise ValueError("positions must be distinct")
    if any(not 0 <= x < n for x in xs) or any(not 0 <= u < n for L in Ls for u in L):
        raise ValueError("positions and targets must lie in range(n)")
    return xs, Ls


# -- tail bounds ----------------------------------------------------------------


def chernoff(mu: float, gamma: float) -> float:
    """``P(|X - mu| >= gamma mu) <= 2 exp(-mu gamma^2 / 3)`` for sums of independent indicators."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    if mu < 0:
        raise ValueError("mu must be non-negative")
    return 2 * math.exp(-mu * gamma ** 2 / 3)


def mcdiarmid_perm(t: float, c: float, r: float, mean: float) -> float:
    """Tail bound for a permutation statistic that is ``c``-Lipschitz under swaps and
    ``r``-certifiable: ``P(|X - EX| >= t + 60 c sqrt(r EX)) <= 4 exp(-t^2 / (8 c^2 r EX))``."""
    if c <= 0 or r <= 0:
        raise ValueError("c and r must be positive")
    if mean <= 0:
        raise ValueError("E[X] must be positive")
    if not 0 < t <= mean:
        raise ValueError("t must lie in (0, E[X]]")
    return 4 * math.exp(-t * t / (8 * c * c * r * mean))


def degree_into_random_set(ell: int, delta: float, delta_prime: float) -> float:
    """``P(deg(v, A) < delta' ell) <= 2 exp(-ell (delta - delta')^2 / 2)`` for a uniform
    ``ell``-subset ``A`` when ``v`` has at least ``delta n`` neighbours."""
    if not 0 < delta_prime < delta < 1:
        raise ValueError("need 0 < delta' < delta < 1")
    if ell < 1:
        raise ValueError("ell must be positive")
    return 2 * math.exp(-ell * (delta - delta_prime) ** 2 / 2)


BOUNDS = {
    "chernoff": chernoff,
    "mcdiarmid_perm": mcdiarmid_perm,
    "degree_into_random_set": degree_into_random_set,
}


def bound(kind: str, **params) -> float:
    try:
        fn = BOUNDS[kind]
    except KeyError:
        raise ValueError(f"unknown bound {kind!r}; choose from {sorted(BOUNDS)}") from None
    return fn(**params)


# -- query files ----------------------------------------------------------------


class QueryFormatError(ValueError):
    pass


def parse_queries(text: str) -> list[SpreadQuery]:
    """Blocks of a line ``s`` followed by ``s`` lines ``x y``; blank lines and ``#`` comments skipped."""
    lines = [(i, ln.split("#")[0].split()) for i, ln in enumerate(text.splitlines(), start=1)]
    lines = [(i, toks) for i, toks in lines if toks]
    out = []
    k = 0
    while k < len(lines):
        i, toks = lines[k]
        if len(toks) != 1 or not toks[0].isdigit() or int(toks[0]) < 1:
            raise QueryFormatError(f"line {i}: expected a positive query length, got {' '.join(toks)!r}")
        s = int(toks[0])
        pairs = []
        for _ in range(s):
            k += 1
            if k >= len(lines):
                raise QueryFormatError(f"line {i}: query announces {s} pairs but the file ends early")
            j, toks = lines[k]
            try:
                x, y = (int(tok) for tok in toks)
            except ValueError:
                raise QueryFormatError(f"line {j}: expected 'x y', got {' '.join(toks)!r}") from None
            pairs.append((x, y))
        try:
            out.append(SpreadQuery(tuple(pairs)))
        except ValueError as exc:
            raise QueryFormatError(f"line {i}: {exc}") from None
        k += 1
    return out


def format_queries(queries) -> str:
    return "".join(f"{qu.s}\n" + "".join(f"{x} {y}\n" for x, y in qu.pairs) for qu in queries)
