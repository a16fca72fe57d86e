"""Host graphs, rooted trees, embeddings and the instance generators.

Vertices are dense integer ids ``0..n-1``. A :class:`Graph` keeps a read-only
boolean adjacency matrix (the hosts we care about are dense) together with
Python-int bitmasks of the neighbourhoods, which the search code uses for fast
set arithmetic. Embeddings are plain ``dict`` objects mapping tree vertices to
graph vertices.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Iterable, Mapping, Sequence

import numpy as np


class DegenerateInputError(ValueError):
    """Raised for empty graphs, empty vertex sets and similar degenerate input."""


class InfeasibleParametersError(ValueError):
    """Raised when generator parameters cannot be satisfied."""


class IncompleteEmbeddingError(ValueError):
    """Raised when an embedding is checked that does not cover every tree vertex."""


def as_rng(seed) -> np.random.Generator:
    """Return a numpy Generator for ``seed`` (an int, None, SeedSequence or Generator)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class Graph:
    """Simple undirected graph on vertices ``0..n-1``."""

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            adj[u, v] = adj[v, u] = True
        self._set_adj(adj)

    @classmethod
    def from_adjacency(cls, adj) -> "Graph":
        adj = np.array(adj, dtype=bool, copy=True)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        if np.any(np.diag(adj)):
            raise ValueError("adjacency has loops")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency is not symmetric")
        g = cls.__new__(cls)
        g._set_adj(adj)
        return g

    def _set_adj(self, adj: np.ndarray) -> None:
        adj.setflags(write=False)
        self.adj = adj
        self.n = adj.shape[0]
        self.degrees = adj.sum(axis=1)
        self.degrees.setflags(write=False)
        self._masks = None

    @property
    def masks(self) -> tuple[int, ...]:
        """Neighbourhood of each vertex as a Python int bitmask."""
        if self._masks is None:
            weights = [1 << i for i in range(self.n)]
            self._masks = tuple(
                sum(weights[j] for j in np.flatnonzero(row)) for row in self.adj
            )
        return self._masks

    @property
    def m(self) -> int:
        return int(self.degrees.sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        us, vs = np.nonzero(np.triu(self.adj, 1))
        return list(zip(us.tolist(), vs.tolist()))

    def neighbors(self, u: int) -> np.ndarray:
        return np.flatnonzero(self.adj[u])

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u, v])

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and np.array_equal(self.adj, other.adj)

    def __hash__(self) -> int:
        return hash((self.n, np.packbits(self.adj).tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


class Tree:
    """A tree stored rooted, as a parent array (``parent[root] == -1``).

    ``maxdeg`` is the degree bound the tree was built under; it defaults to the
    actual maximum degree.
    """

    def __init__(self, parent: Sequence[int], root: int | None = None, maxdeg: int | None = None):
        parent = tuple(int(p) for p in parent)
        n = len(parent)
        if n == 0:
            raise DegenerateInputError("a tree needs at least one vertex")
        roots = [i for i, p in enumerate(parent) if p == -1]
        if len(roots) != 1:
            raise ValueError(f"expected exactly one root, found {len(roots)}")
        if root is not None and root != roots[0]:
            raise ValueError("root does not match the parent array")
        root = roots[0]
        children: list[list[int]] = [[] for _ in range(n)]
        for x, p in enumerate(parent):
            if p == -1:
                continue
            if not 0 <= p < n or p == x:
                raise ValueError(f"bad parent {p} for vertex {x}")
            children[p].append(x)
        seen = 0
        stack = [root]
        while stack:
            x = stack.pop()
            seen += 1
            stack.extend(children[x])
        if seen != n:
            raise ValueError("parent array does not describe a connected acyclic graph")
        self.n = n
        self.parent = parent
        self.root = root
        self.children = tuple(tuple(c) for c in children)
        self.degree = tuple(len(children[x]) + (parent[x] != -1) for x in range(n))
        actual = max(self.degree)
        if maxdeg is None:
            maxdeg = actual
        elif actual > maxdeg:
            raise ValueError(f"tree has a vertex of degree {actual} > maxdeg={maxdeg}")
        self.maxdeg = maxdeg

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], root: int = 0,
                   maxdeg: int | None = None) -> "Tree":
        nbrs: list[list[int]] = [[] for _ in range(n)]
        count = 0
        for u, v in edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
            count += 1
        if count != n - 1:
            raise ValueError(f"a tree on {n} vertices has {n - 1} edges, got {count}")
        parent = [-2] * n
        parent[root] = -1
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y in nbrs[x]:
                if parent[y] == -2:
                    parent[y] = x
                    queue.append(y)
        if -2 in parent:
            raise ValueError("edges do not form a connected graph")
        return cls(parent, root, maxdeg)

    def edges(self) -> list[tuple[int, int]]:
        return [(p, x) for x, p in enumerate(self.parent) if p != -1]

    def neighbors(self, x: int) -> tuple[int, ...]:
        p = self.parent[x]
        return self.children[x] if p == -1 else (p,) + self.children[x]

    def bfs_order(self) -> list[int]:
        order = [self.root]
        for x in order:
            order.extend(self.children[x])
        return order

    def rerooted(self, root: int) -> "Tree":
        return Tree.from_edges(self.n, self.edges(), root, self.maxdeg)

    def __eq__(self, other) -> bool:
        return isinstance(other, Tree) and self.parent == other.parent

    def __hash__(self) -> int:
        return hash(self.parent)

    def __repr__(self) -> str:
        return f"Tree(n={self.n}, root={self.root}, maxdeg={self.maxdeg})"


def _check_vertex(g: Graph, u: int) -> None:
    if not 0 <= u < g.n:
        raise ValueError(f"vertex {u} out of range for n={g.n}")


def _as_index(g: Graph, s) -> np.ndarray:
    idx = np.asarray(sorted(set(int(x) for x in s)), dtype=np.intp)
    if idx.size and (idx[0] < 0 or idx[-1] >= g.n):
        raise ValueError("vertex set out of range")
    return idx


def min_degree(g: Graph) -> int:
    if g.n == 0:
        raise DegenerateInputError("empty graph has no minimum degree")
    return int(g.degrees.min())


def degree_into(g: Graph, u: int, s) -> int:
    """Number of neighbours of ``u`` inside ``s`` (``u`` itself never counts)."""
    _check_vertex(g, u)
    idx = _as_index(g, s)
    return int(g.adj[u, idx].sum())


def induced_min_degree(g: Graph, s) -> int:
    idx = _as_index(g, s)
    if idx.size == 0:
        raise DegenerateInputError("induced minimum degree of an empty set")
    return int(g.adj[np.ix_(idx, idx)].sum(axis=1).min())


def meets(count, frac: float, size) -> bool:
    """``count >= frac * size`` with a little slack for float rounding."""
    return count >= frac * size - 1e-9


def gen_dirac_graph(n: int, delta_frac: float, alpha: float, seed=None) -> Graph:
    """Random graph with minimum degree at least ``ceil((delta_frac + alpha) * n)``.

    Edges are sampled independently with probability ``delta_frac + alpha + 0.05``;
    vertices left below the target then receive edges to uniformly random
    non-neighbours until the bound holds.
    """
    if n < 10:
        raise InfeasibleParametersError("n must be at least 10")
    frac = delta_frac + alpha
    if not 0 < frac < 1:
        raise InfeasibleParametersError(f"delta_frac + alpha = {frac} must lie in (0, 1)")
    target = math.ceil(frac * n - 1e-9)
    if target > n - 1:
        raise InfeasibleParametersError(f"minimum degree {target} impossible on {n} vertices")
    rng = as_rng(seed)
    p = min(1.0, frac + 0.05)
    upper = np.triu(rng.random((n, n)) < p, 1)
    adj = upper | upper.T
    deg = adj.sum(axis=1)
    for u in range(n):
        missing = target - deg[u]
        if missing <= 0:
            continue
        non = np.flatnonzero(~adj[u])
        non = non[non != u]
        for w in rng.choice(non, size=missing, replace=False):
            adj[u, w] = adj[w, u] = True
            deg[u] += 1
            deg[w] += 1
    return Graph.from_adjacency(adj)


def gen_bounded_tree(n: int, max_deg: int, seed=None) -> Tree:
    """Random recursive tree rooted at 0 whose degrees never exceed ``max_deg``.

    Vertex ``i`` attaches to a uniformly random earlier vertex that still has
    room under the cap.
    """
    if n < 1:
        raise DegenerateInputError("a tree needs at least one vertex")
    if max_deg < 2 and n >= 3 or max_deg < 1 and n == 2:
        raise InfeasibleParametersError(f"no tree on {n} vertices has maximum degree {max_deg}")
    rng = as_rng(seed)
    parent = [-1] * n
    deg = [0] * n
    open_ = [0] if n > 1 else []
    for i in range(1, n):
        k = int(rng.integers(len(open_)))
        p = open_[k]
        parent[i] = p
        deg[p] += 1
        deg[i] = 1
        if deg[p] >= max_deg:
            open_[k] = open_[-1]
            open_.pop()
        if deg[i] < max_deg:
            open_.append(i)
    return Tree(parent, 0, max_deg)


def is_valid_embedding(t: Tree, g: Graph, phi: Mapping[int, int]) -> bool:
    """True iff ``phi`` is injective and maps every tree edge onto a graph edge."""
    missing = [x for x in range(t.n) if x not in phi]
    if missing:
        raise IncompleteEmbeddingError(f"embedding misses tree vertices {missing[:5]}")
    images = [phi[x] for x in range(t.n)]
    if any(not 0 <= y < g.n for y in images):
        return False
    if len(set(images)) != t.n:
        return False
    return all(g.adj[phi[p], phi[x]] for p, x in t.edges())


# file formats ---------------------------------------------------------------

def format_graph(g: Graph) -> str:
    edges = g.edges()
    lines = [f"{g.n} {len(edges)}"] + [f"{u} {v}" for u, v in edges]
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise ValueError("empty graph file")
    n, m = (int(x) for x in rows[0])
    if len(rows) - 1 != m:
        raise ValueError(f"header promises {m} edges, file has {len(rows) - 1}")
    edges = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ValueError(f"line {lineno}: expected 'u v'")
        u, v = int(row[0]), int(row[1])
        if u >= v:
            raise ValueError(f"line {lineno}: edges must be written with u < v")
        edges.append((u, v))
    return Graph(n, edges)


def format_tree(t: Tree) -> str:
    lines = [f"{t.n} {t.root}"] + [f"{x} {p}" for x, p in enumerate(t.parent) if p != -1]
    return "\n".join(lines) + "\n"


def parse_tree(text: str, maxdeg: int | None = None) -> Tree:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise ValueError("empty tree file")
    n, root = (int(x) for x in rows[0])
    parent = [-2] * n
    parent[root] = -1
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ValueError(f"line {lineno}: expected 'child parent'")
        child, p = int(row[0]), int(row[1])
        if parent[child] != -2:
            raise ValueError(f"line {lineno}: vertex {child} listed twice")
        parent[child] = p
    if -2 in parent:
        raise ValueError("tree file does not give a parent for every non-root vertex")
    return Tree(parent, root, maxdeg)


def read_graph(path) -> Graph:
    with open(path) as fh:
        return parse_graph(fh.read())


def write_graph(g: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_graph(g))


def read_tree(path, maxdeg: int | None = None) -> Tree:
    with open(path) as fh:
        return parse_tree(fh.read(), maxdeg)


def write_tree(t: Tree, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_tree(t))
