"""Independent reference computations used by the tests.

Nothing here imports the algorithms under test; where possible the answer
comes from networkx or from plain enumeration with exact fractions.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction

import networkx as nx
from networkx.algorithms import isomorphism


def to_nx(g) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


def tree_to_nx(t) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(t.n))
    h.add_edges_from((p, x) for x, p in enumerate(t.parent) if p >= 0)
    return h


def induced_min_degree(g, s) -> int:
    sub = to_nx(g).subgraph(s)
    return min(d for _, d in sub.degree())


def rooted_embedding_exists(g, hostset, t, root, v) -> bool:
    """VF2 monomorphism of the tree onto ``G[hostset + v]`` with ``root`` forced onto ``v``."""
    nodes = set(hostset) | {v}
    if len(nodes) != t.n:
        return False
    host = to_nx(g).subgraph(nodes).copy()
    nx.set_node_attributes(host, {u: u == v for u in host}, "pin")
    tr = tree_to_nx(t)
    nx.set_node_attributes(tr, {x: x == root for x in tr}, "pin")
    gm = isomorphism.GraphMatcher(host, tr, node_match=lambda a, b: a["pin"] == b["pin"])
    return gm.subgraph_is_monomorphic()


def count_embeddings(g, t) -> int:
    """Number of injective edge-preserving maps of ``t`` onto ``g`` (spanning), via VF2."""
    gm = isomorphism.GraphMatcher(to_nx(g), tree_to_nx(t))
    return sum(1 for _ in gm.subgraph_monomorphisms_iter())


def all_single_vertex_cuts(t, anchor):
    """Every split of ``t`` at one vertex ``w`` into (rest, w + some child subtrees).

    Children are taken with respect to rooting at ``anchor``. Yields pairs of
    frozensets ``(T1, T2)`` with ``anchor`` in ``T1`` and ``T2`` a nonempty
    union of child subtrees of ``w`` together with ``w``.
    """
    adj = {x: set() for x in range(t.n)}
    for x, p in enumerate(t.parent):
        if p >= 0:
            adj[x].add(p)
            adj[p].add(x)
    parent = {anchor: None}
    order = [anchor]
    for x in order:
        for y in sorted(adj[x]):
            if y not in parent:
                parent[y] = x
                order.append(y)
    below = {x: {x} for x in order}
    for x in reversed(order):
        if parent[x] is not None:
            below[parent[x]] |= below[x]
    everything = frozenset(range(t.n))
    for w in order:
        kids = [y for y in adj[w] if parent.get(y) == w]
        for r in range(1, len(kids) + 1):
            for chosen in itertools.combinations(kids, r):
                t2 = frozenset({w}.union(*(below[y] for y in chosen)))
                t1 = (everything - t2) | {w}
                if anchor in t1 and len(t1) >= 1:
                    yield t1, t2


def perm_probability(n, xs, Ls) -> Fraction:
    hits = sum(
        all(p[x] in L for x, L in zip(xs, Ls)) for p in itertools.permutations(range(n))
    )
    return Fraction(hits, math.factorial(n))


def random_order_matching_law(adj) -> dict:
    """Exact output law of 'random left order, uniform free neighbour' on a host
    without dead ends. Keys are tuples ``match[i]``."""
    m = len(adj)
    law: Counter = Counter()

    def walk(order, k, match, free, prob):
        if k == m:
            law[tuple(match)] += prob
            return
        i = order[k]
        opts = [j for j in range(m) if adj[i][j] and j in free]
        if not opts:
            raise AssertionError("dead end in a host assumed to have none")
        for j in opts:
            match[i] = j
            walk(order, k + 1, match, free - {j}, prob / len(opts))
        match[i] = -1

    for order in itertools.permutations(range(m)):
        walk(order, 0, [-1] * m, frozenset(range(m)), Fraction(1, math.factorial(m)))
    return dict(law)


def colour_respecting_embeddings(host, classes, tree, colour, v) -> list[tuple]:
    """All embeddings with root -> v and colour-i vertices inside classes[i], by brute force."""
    others = [u for u in range(host.n) if u != v]
    rest = [x for x in range(tree.n) if x != tree.root]
    out = []
    for imgs in itertools.permutations(others, len(rest)):
        phi = dict(zip(rest, imgs))
        phi[tree.root] = v
        if any(phi[x] not in classes[colour[x]] for x in rest):
            continue
        if all(host.has_edge(phi[x], phi[tree.parent[x]]) for x in rest):
            out.append(tuple(phi[x] for x in range(tree.n)))
    return out
