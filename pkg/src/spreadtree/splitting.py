"""Tree-splittings into edge-disjoint subtrees, and their bag-graphs / bag-trees.

A piece of a splitting is stored as the frozenset of its vertices; its edges
are the tree edges with both ends in the set. Two pieces share at most one
vertex, so no edge is counted twice.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .graph import Graph, Tree


class SplittingError(ValueError):
    pass


@dataclass(frozen=True)
class TreeSplitting:
    tree: Tree
    pieces: tuple[frozenset, ...]

    @property
    def ell(self) -> int:
        return len(self.pieces)

    def sizes(self) -> list[int]:
        return [len(p) for p in self.pieces]


@dataclass(frozen=True)
class BagTree:
    """Spanning tree of the bag-graph plus the singleton bag ``{star_anchor}``.

    Nodes ``0..ell-1`` are the pieces and node ``star == ell`` is the singleton
    bag. ``shared[i]`` is the tree vertex node ``i`` has in common with its
    parent; ``order`` lists the nodes in BFS order from ``star``.
    """

    parent: tuple[int, ...]
    shared: tuple[int, ...]
    order: tuple[int, ...]
    star_anchor: int

    @property
    def star(self) -> int:
        return len(self.parent) - 1

    @property
    def size(self) -> int:
        return len(self.parent)

    def as_tree(self) -> Tree:
        return Tree(self.parent, self.star)

    def degrees(self) -> list[int]:
        deg = [0] * self.size
        for i, p in enumerate(self.parent):
            if p != -1:
                deg[i] += 1
                deg[p] += 1
        return deg


def _tree_nbrs(t: Tree) -> list[tuple[int, ...]]:
    return [t.neighbors(x) for x in range(t.n)]


def _split(nbrs, vertices: frozenset, anchor: int, m: int) -> tuple[frozenset, frozenset]:
    # root the subtree at the anchor
    parent = {anchor: -1}
    order = [anchor]
    for x in order:
        for y in nbrs[x]:
            if y in vertices and y not in parent:
                parent[y] = x
                order.append(y)
    children = {x: [] for x in order}
    for x in order[1:]:
        children[parent[x]].append(x)
    size = {}
    for x in reversed(order):
        size[x] = 1 + sum(size[c] for c in children[x])

    # a piece needs at least one edge, so never aim below two vertices
    target = max(m, 2)
    w = anchor
    while True:
        big = [c for c in children[w] if size[c] >= target]
        if not big:
            break
        w = min(big)

    taken = [w]
    total = 1
    for c in sorted(children[w]):
        if total >= target:
            break
        stack = [c]
        while stack:
            x = stack.pop()
            taken.append(x)
            stack.extend(children[x])
        total += size[c]
    t2 = frozenset(taken)
    t1 = (vertices - t2) | {w}
    return frozenset(t1), t2


def split_once(t: Tree, anchor: int, m: int) -> tuple[frozenset, frozenset]:
    """Cut ``t`` into two edge-disjoint subtrees ``(T1, T2)`` with ``anchor`` in T1.

    The second piece has between ``m`` and ``3m`` vertices (in fact fewer than
    ``2 * max(m, 2)``) and always contains an edge.
    """
    if not 1 <= m or 3 * m > t.n:
        raise SplittingError(f"need 1 <= m <= n/3, got m={m}, n={t.n}")
    if not 0 <= anchor < t.n:
        raise SplittingError(f"anchor {anchor} not a tree vertex")
    return _split(_tree_nbrs(t), frozenset(range(t.n)), anchor, m)


def tree_splitting(t: Tree, m: int) -> TreeSplitting:
    """Split ``t`` into edge-disjoint subtrees of sizes in ``[m, 4m]``.

    Pieces are cut off one at a time with :func:`split_once` (anchored at the
    root of ``t``) until the remainder has at most ``4m`` vertices.
    """
    if not 1 <= m <= t.n:
        raise SplittingError(f"need 1 <= m <= n, got m={m}, n={t.n}")
    nbrs = _tree_nbrs(t)
    current = frozenset(range(t.n))
    cut = []
    while len(current) > 4 * m:
        current, piece = _split(nbrs, current, t.root, m)
        cut.append(piece)
    return TreeSplitting(t, (current, *cut))


def splitting_problems(t: Tree, pieces: Sequence[frozenset], m: int | None = None) -> list[str]:
    """Every way ``pieces`` fails to be a tree-splitting of ``t`` (empty if valid)."""
    problems = []
    owner: dict[tuple[int, int], int] = {}
    for i, piece in enumerate(pieces):
        if not piece:
            problems.append(f"piece {i} is empty")
            continue
        inside = [(p, x) for p, x in t.edges() if p in piece and x in piece]
        if len(inside) != len(piece) - 1:
            problems.append(f"piece {i} is not a subtree")
        for e in inside:
            if e in owner:
                problems.append(f"edge {e} in pieces {owner[e]} and {i}")
            owner[e] = i
        if m is not None and not m <= len(piece) <= 4 * m:
            problems.append(f"piece {i} has size {len(piece)} outside [{m}, {4 * m}]")
    if len(owner) != t.n - 1:
        problems.append(f"pieces cover {len(owner)} of {t.n - 1} edges")
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            if len(pieces[i] & pieces[j]) > 1:
                problems.append(f"pieces {i} and {j} share {len(pieces[i] & pieces[j])} vertices")
    return problems


def bag_graph(s: TreeSplitting) -> Graph:
    edges = [
        (i, j)
        for i in range(s.ell)
        for j in range(i + 1, s.ell)
        if s.pieces[i] & s.pieces[j]
    ]
    return Graph(s.ell, edges)


def bag_tree(s: TreeSplitting, star_anchor: int) -> BagTree:
    """BFS spanning tree of the bag-graph of ``s`` plus the singleton bag ``{star_anchor}``.

    The singleton bag is the root; lower piece indices win ties.
    """
    if not 0 <= star_anchor < s.tree.n:
        raise SplittingError(f"star anchor {star_anchor} is not a tree vertex")
    ell = s.ell
    containing: dict[int, list[int]] = {}
    for i, piece in enumerate(s.pieces):
        for x in piece:
            containing.setdefault(x, []).append(i)
    parent = [-2] * (ell + 1)
    shared = [-1] * (ell + 1)
    parent[ell] = -1
    order = [ell]
    queue = deque()
    for i in containing.get(star_anchor, []):
        parent[i] = ell
        shared[i] = star_anchor
        order.append(i)
        queue.append(i)
    while queue:
        i = queue.popleft()
        found = {}
        for x in s.pieces[i]:
            for j in containing[x]:
                if parent[j] == -2 and j not in found:
                    found[j] = x
        for j in sorted(found):
            parent[j] = i
            shared[j] = found[j]
            order.append(j)
            queue.append(j)
    if -2 in parent:
        raise SplittingError("bag-graph is disconnected; not a valid splitting")
    return BagTree(tuple(parent), tuple(shared), tuple(order), star_anchor)


# serialization ----------------------------------------------------------------

def format_splitting(s: TreeSplitting) -> str:
    return "".join(" ".join(map(str, sorted(p))) + "\n" for p in s.pieces)


def parse_splitting(text: str, t: Tree) -> TreeSplitting:
    pieces = tuple(
        frozenset(int(x) for x in ln.split()) for ln in text.splitlines() if ln.strip()
    )
    problems = splitting_problems(t, pieces)
    if problems:
        raise SplittingError("; ".join(problems))
    return TreeSplitting(t, pieces)


def format_bagtree(bt: BagTree) -> str:
    """One line per node: ``node parent shared_vertex`` (``-1`` for the root)."""
    return "".join(f"{i} {bt.parent[i]} {bt.shared[i]}\n" for i in bt.order)
