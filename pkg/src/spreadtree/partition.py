"""Random labelled vertex partitions, the good-pair auxiliary graph and its core.

Parts are labelled ``(c, j)``: colour ``c`` (the size class) and index ``j``
within the colour, ``0 <= j < b_c``. All degree thresholds are relative,
``frac * |set|``, and compared through :func:`spreadtree.graph.meets`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, as_rng, induced_min_degree, meets

ROOT = ("*", 0)


class PartitionError(ValueError):
    pass


class CoreExtractionError(RuntimeError):
    """No core satisfying the retention conditions was found on this draw."""


@dataclass(frozen=True)
class PartitionSpec:
    """Size profile and tolerances for a random labelled partition.

    ``sizes[c]`` is the part size ``a_c`` and ``counts[c]`` the number of parts
    ``b_c`` of colour ``c``.
    """

    C: int
    K: int
    sizes: dict
    counts: dict
    delta: float = 0.5
    alpha: float = 0.25
    eps: float = 0.15
    gamma: float = 0.15
    eta: float = 0.0

    def __post_init__(self):
        if set(self.sizes) != set(self.counts):
            raise PartitionError("sizes and counts must cover the same colours")
        for c in self.sizes:
            if self.sizes[c] < 1:
                raise PartitionError(f"part size for colour {c} must be >= 1")
            if self.counts[c] < 0:
                raise PartitionError(f"part count for colour {c} must be >= 0")
        for name in ("eps", "gamma"):
            if not 0 < getattr(self, name) < 1:
                raise PartitionError(f"{name} must lie in (0, 1)")

    @property
    def colours(self) -> list[int]:
        return sorted(self.sizes)

    @property
    def total(self) -> int:
        return sum(self.sizes[c] * self.counts[c] for c in self.sizes)

    @property
    def good_frac(self) -> float:
        return self.delta + self.alpha / 2


@dataclass(frozen=True)
class LabelledPartition:
    parts: dict  # (c, j) -> sorted tuple of vertices
    leftover: tuple
    root: int
    n: int

    @property
    def labels(self) -> list:
        return list(self.parts)

    def owner(self) -> dict:
        return {u: lab for lab, part in self.parts.items() for u in part}


def sample_partition(g: Graph, spec: PartitionSpec, v: int, seed=None) -> LabelledPartition:
    """Uniform labelled partition of a subset of ``V(g) - v`` with the profile of ``spec``.

    A uniform permutation of ``V(g) - v`` is cut into consecutive blocks, colour
    by colour.
    """
    if not 0 <= v < g.n:
        raise PartitionError(f"root vertex {v} out of range")
    if spec.total >= g.n:
        raise PartitionError(f"sum of a_c * b_c = {spec.total} must be < n = {g.n}")
    rng = as_rng(seed)
    others = np.delete(np.arange(g.n), v)
    perm = rng.permutation(others)
    parts = {}
    pos = 0
    for c in spec.colours:
        a = spec.sizes[c]
        for j in range(spec.counts[c]):
            parts[(c, j)] = tuple(sorted(perm[pos:pos + a].tolist()))
            pos += a
    return LabelledPartition(parts, tuple(sorted(perm[pos:].tolist())), v, g.n)


def extension_ok(g: Graph, part, frac: float, base: int = 1) -> np.ndarray:
    """For every vertex ``w``: does ``G[part + w]`` have min degree >= ``frac * (|part| + base)``?

    ``base=1`` gives the ``|part + w|`` normalisation, ``base=0`` the ``|part|``
    one. Entries for ``w`` inside ``part`` are False.
    """
    idx = np.asarray(part, dtype=np.intp)
    rows = g.adj[idx]
    inner = rows[:, idx].sum(axis=1)
    worst = (inner[:, None] + rows).min(axis=0)
    into = rows.sum(axis=0)
    ok = meets(np.minimum(worst, into), frac, len(idx) + base)
    ok[idx] = False
    return ok


def is_good_set(g: Graph, part, delta: float, alpha: float) -> bool:
    if len(part) == 0:
        raise PartitionError("empty part")
    return meets(induced_min_degree(g, part), delta + alpha / 2, len(part))


def is_good_pair(g: Graph, p, q, delta: float, alpha: float) -> bool:
    """Both ``G[p + w]`` for every ``w`` in ``q`` and ``G[q + w]`` for ``w`` in ``p`` stay dense."""
    if not p or not q:
        raise PartitionError("empty part")
    if set(p) & set(q):
        raise PartitionError("good pairs are only defined for disjoint sets")
    frac = delta + alpha / 2
    return bool(extension_ok(g, list(p), frac)[list(q)].all()
                and extension_ok(g, list(q), frac)[list(p)].all())


@dataclass
class AuxGraph:
    """Auxiliary graph on parts; node ``i`` is the part ``sets[labels[i]]``."""

    labels: list
    sets: dict
    adj: np.ndarray
    good: np.ndarray
    counts: dict = field(default_factory=dict)

    def index(self, label) -> int:
        return self.labels.index(label)

    def colour(self, i: int):
        return self.labels[i][0]

    def classes(self) -> dict:
        out: dict = {}
        for i, lab in enumerate(self.labels):
            if lab != ROOT:
                out.setdefault(lab[0], []).append(i)
        return out

    def as_graph(self) -> Graph:
        return Graph.from_adjacency(self.adj)

    def subgraph(self, keep) -> "AuxGraph":
        keep = list(keep)
        return AuxGraph(
            [self.labels[i] for i in keep],
            {self.labels[i]: self.sets[self.labels[i]] for i in keep},
            self.adj[np.ix_(keep, keep)].copy(),
            self.good[keep].copy(),
            dict(self.counts),
        )


def build_aux_graph(g: Graph, part: LabelledPartition, delta: float, alpha: float) -> AuxGraph:
    labels = part.labels
    frac = delta + alpha / 2
    P = len(labels)
    direction = np.zeros((P, P), dtype=bool)
    good = np.zeros(P, dtype=bool)
    for i, lab in enumerate(labels):
        R = part.parts[lab]
        ok = extension_ok(g, R, frac)
        good[i] = meets(induced_min_degree(g, R), frac, len(R))
        for k, other in enumerate(labels):
            if k != i:
                direction[i, k] = ok[list(part.parts[other])].all()
    counts: dict = {}
    for c, _ in labels:
        counts[c] = counts.get(c, 0) + 1
    return AuxGraph(list(labels), dict(part.parts), direction & direction.T, good, counts)


def _class_sizes(a: AuxGraph, alive: np.ndarray) -> dict:
    sizes = {c: 0 for c in a.counts}
    for i in np.flatnonzero(alive):
        sizes[a.colour(i)] += 1
    return sizes


def _deficits(a: AuxGraph, alive: np.ndarray, eps: float) -> np.ndarray:
    """Shortfall of each alive node against the cross-degree condition, summed over colours."""
    cols = {c: np.array([a.colour(i) == c for i in range(len(a.labels))], dtype=bool) & alive
            for c in a.counts}
    deficit = np.zeros(len(a.labels))
    for c, members in cols.items():
        size = members.sum()
        deg = a.adj[:, members].sum(axis=1)
        # a node is never its own neighbour, so it is measured against the others
        own = np.array([a.colour(i) == c for i in range(len(a.labels))], dtype=bool)
        others = size - own
        need = (1 - eps) * others
        deficit += np.where(meets(deg, 1 - eps, others), 0.0, need - deg)
    return np.where(alive, deficit, 0.0)


def core_problems(a: AuxGraph, eps: float, counts: dict | None = None) -> list[str]:
    """Violations of the retention (B1), cross-degree (B2) and goodness (B3) conditions."""
    counts = a.counts if counts is None else counts
    alive = np.ones(len(a.labels), dtype=bool)
    problems = []
    sizes = _class_sizes(a, alive)
    for c, b in counts.items():
        if not meets(sizes.get(c, 0), 1 - eps, b):
            problems.append(f"B1: colour {c} keeps {sizes.get(c, 0)} of {b}")
    d = _deficits(a, alive, eps)
    for i in np.flatnonzero(d > 0):
        problems.append(f"B2: node {a.labels[i]} short of cross-degree")
    for i in np.flatnonzero(~a.good):
        problems.append(f"B3: node {a.labels[i]} is not good")
    return problems


def extract_core(a: AuxGraph, eps: float) -> AuxGraph:
    """Delete bad parts, then repeatedly the part furthest below the cross-degree bound.

    Raises :class:`CoreExtractionError` when the surviving classes are too
    small; the result always passes :func:`core_problems`.
    """
    if ROOT in a.labels:
        raise ValueError("extract the core before attaching the root")
    alive = a.good.copy()
    while True:
        d = _deficits(a, alive, eps)
        worst = int(np.argmax(d))
        if d[worst] <= 0:
            break
        alive[worst] = False
    sizes = _class_sizes(a, alive)
    short = [c for c, b in a.counts.items() if not meets(sizes[c], 1 - eps, b)]
    if short:
        raise CoreExtractionError(f"colours {short} lose more than eps of their parts")
    core = a.subgraph(np.flatnonzero(alive))
    assert not core_problems(core, eps, a.counts)
    return core


def attach_root(a: AuxGraph, g: Graph, v: int, delta: float, alpha: float) -> AuxGraph:
    """Add the node ``{v}``, adjacent to every part ``R`` with ``G[R + v]`` dense enough."""
    P = len(a.labels)
    adj = np.zeros((P + 1, P + 1), dtype=bool)
    adj[:P, :P] = a.adj
    frac = delta + alpha / 2
    for i, lab in enumerate(a.labels):
        adj[i, P] = adj[P, i] = extension_ok(g, a.sets[lab], frac)[v]
    sets = dict(a.sets)
    sets[ROOT] = (v,)
    return AuxGraph(a.labels + [ROOT], sets, adj, np.append(a.good, True), dict(a.counts))


@dataclass
class PartitionStats:
    """Per-draw statistics behind the high-probability partition properties.

    ``part_fraction[label]``: share of vertices ``u`` outside the part with
    ``deg(u, R) >= (delta + alpha/2) |R + u|``. ``vertex_fraction[u]``: share of
    parts ``R`` not containing ``u`` with ``delta(G[R + u]) >= (delta + alpha/2) |R|``.
    ``good_pair_counts[(label, d)]``: number of ``u`` in colour-``d`` parts (other
    than ``R``) with ``delta(G[R + u]) >= (delta + 2 alpha/3) |R + u|``.
    ``degree_events[size]``: ``(violations, trials)`` of ``deg(u, R) < (delta + alpha/2) |R|``
    over parts of that size and vertices outside them.
    """

    part_fraction: dict
    vertex_fraction: np.ndarray
    good_pair_counts: dict
    degree_events: dict

    def to_record(self) -> dict:
        rec = {
            "parts": len(self.part_fraction),
            "part_fraction_min": min(self.part_fraction.values(), default=1.0),
            "part_fraction_mean": float(np.mean(list(self.part_fraction.values()))) if self.part_fraction else 1.0,
            "vertex_fraction_min": float(self.vertex_fraction.min()),
            "vertex_fraction_mean": float(self.vertex_fraction.mean()),
        }
        for size, (bad, total) in sorted(self.degree_events.items()):
            rec[f"degree_violation_rate_{size}"] = bad / total
        for (lab, d), x in sorted(self.good_pair_counts.items()):
            rec[f"X_{lab[0]}_{lab[1]}_{d}"] = x
        return rec


def partition_stats(g: Graph, part: LabelledPartition, delta: float, alpha: float) -> PartitionStats:
    frac = delta + alpha / 2
    strong = delta + 2 * alpha / 3
    labels = part.labels
    n = g.n
    member_of = np.full(n, -1)
    for i, lab in enumerate(labels):
        member_of[list(part.parts[lab])] = i
    part_fraction = {}
    hits = np.zeros(n)
    eligible = np.zeros(n)
    good_pair_counts = {}
    degree_events: dict = {}
    colours = sorted({lab[0] for lab in labels})
    for i, lab in enumerate(labels):
        R = list(part.parts[lab])
        outside = np.ones(n, dtype=bool)
        outside[R] = False
        deg = g.adj[R].sum(axis=0)
        part_fraction[lab] = float(meets(deg[outside], frac, len(R) + 1).mean())
        hits += extension_ok(g, R, frac, base=0)
        eligible += outside
        bad, total = degree_events.get(len(R), (0, 0))
        degree_events[len(R)] = (bad + int((~meets(deg[outside], frac, len(R))).sum()),
                                 total + int(outside.sum()))
        ok_strong = extension_ok(g, R, strong)
        for d in colours:
            in_d = np.isin(member_of, [k for k, other in enumerate(labels) if other[0] == d and k != i])
            good_pair_counts[(lab, d)] = int((ok_strong & in_d).sum())
    with np.errstate(invalid="ignore"):
        vertex_fraction = np.where(eligible > 0, hits / np.maximum(eligible, 1), 1.0)
    return PartitionStats(part_fraction, vertex_fraction, good_pair_counts, degree_events)


# serialization ----------------------------------------------------------------

def format_partition(part: LabelledPartition) -> str:
    return "".join(f"{c} {j} : {' '.join(map(str, R))}\n" for (c, j), R in part.parts.items())


def parse_partition(text: str, n: int, root: int) -> LabelledPartition:
    parts = {}
    for lineno, ln in enumerate(text.splitlines(), start=1):
        if not ln.strip():
            continue
        head, sep, body = ln.partition(":")
        if not sep or len(head.split()) != 2:
            raise PartitionError(f"line {lineno}: expected 'c j : v1 v2 ...'")
        c, j = (int(x) for x in head.split())
        parts[(c, j)] = tuple(sorted(int(x) for x in body.split()))
    used = {u for R in parts.values() for u in R}
    if len(used) != sum(len(R) for R in parts.values()) or root in used:
        raise PartitionError("parts overlap or contain the root")
    leftover = tuple(u for u in range(n) if u != root and u not in used)
    return LabelledPartition(parts, leftover, root, n)


def format_stats(stats: PartitionStats) -> str:
    return "".join(f"{k} {v}\n" for k, v in stats.to_record().items())


def a1_a2_floor(alpha: float, C: int) -> float:
    """The ``1 - 3 exp(-alpha^2 C / 10)`` fraction promised by conditions A1 and A2."""
    return 1 - 3 * math.exp(-alpha ** 2 * C / 10)
