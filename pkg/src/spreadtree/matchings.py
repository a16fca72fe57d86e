"""Random perfect matchings and K_{1,k} star matchings in dense bipartite graphs.

The perfect matching sampler visits left vertices in a uniformly random order
and matches each one to a uniformly random free neighbour, restarting from
scratch on a dead end. On complete bipartite graphs this is exactly uniform.
Star matchings are unions of perfect matchings over a random equipartition of
the right side.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .graph import as_rng, meets


class MatchingError(RuntimeError):
    pass


@dataclass(frozen=True)
class BipartiteGraph:
    """Bipartite graph given by its ``|A| x |B|`` biadjacency matrix.

    ``left`` / ``right`` optionally carry labels for the two sides; indices are
    used everywhere else.
    """

    adj: np.ndarray
    left: tuple = ()
    right: tuple = ()

    def __post_init__(self):
        adj = np.array(self.adj, dtype=bool)
        adj.setflags(write=False)
        object.__setattr__(self, "adj", adj)
        if not self.left:
            object.__setattr__(self, "left", tuple(range(adj.shape[0])))
        if not self.right:
            object.__setattr__(self, "right", tuple(range(adj.shape[1])))
        if len(self.left) != adj.shape[0] or len(self.right) != adj.shape[1]:
            raise ValueError("labels do not match the biadjacency shape")

    @property
    def shape(self) -> tuple[int, int]:
        return self.adj.shape

    def min_degree_fractions(self) -> tuple[float, float]:
        """Smallest ``deg(a, B)/|B|`` over the left side and ``deg(b, A)/|A|`` over the right."""
        nA, nB = self.adj.shape
        left = self.adj.sum(axis=1).min() / nB if nA and nB else 1.0
        right = self.adj.sum(axis=0).min() / nA if nA and nB else 1.0
        return float(left), float(right)

    @cached_property
    def row_masks(self) -> tuple[int, ...]:
        packed = np.packbits(self.adj, axis=1, bitorder="little")
        return tuple(int.from_bytes(r.tobytes(), "little") for r in packed)

    @cached_property
    def perfect(self) -> bool:
        return has_perfect_matching(self)

    def restrict_right(self, cols) -> "BipartiteGraph":
        cols = list(cols)
        return BipartiteGraph(self.adj[:, cols], self.left, tuple(self.right[j] for j in cols))


def has_perfect_matching(h: BipartiteGraph) -> bool:
    nA, nB = h.shape
    if nA != nB:
        return False
    if nA == 0:
        return True
    match = maximum_bipartite_matching(csr_matrix(h.adj), perm_type="column")
    return bool((match >= 0).all())


def sample_perfect_matching(h: BipartiteGraph, seed=None, max_restarts: int = 10_000) -> tuple:
    """Random perfect matching; ``result[i]`` is the right index matched to left vertex ``i``."""
    nA, nB = h.shape
    if nA != nB:
        raise MatchingError(f"sides differ in size ({nA} vs {nB})")
    if not h.perfect:
        raise MatchingError("no perfect matching exists")
    rng = as_rng(seed)
    rows = h.row_masks
    for _ in range(max_restarts):
        match = [-1] * nA
        free = (1 << nB) - 1
        order = rng.permutation(nA).tolist()
        picks = rng.random(nA).tolist()
        for i, u in zip(order, picks):
            options = rows[i] & free
            if not options:
                break
            for _ in range(int(u * options.bit_count())):
                options &= options - 1
            low = options & -options
            match[i] = low.bit_length() - 1
            free ^= low
        else:
            return tuple(match)
    raise MatchingError(f"no perfect matching found in {max_restarts} restarts")


def equipartition_right(b, k: int, seed=None) -> list[tuple]:
    """Uniformly random ordered split of ``b`` into ``k`` equal parts."""
    b = list(b)
    if k < 1 or len(b) % k:
        raise MatchingError(f"cannot split {len(b)} vertices into {k} equal parts")
    rng = as_rng(seed)
    perm = [b[i] for i in rng.permutation(len(b))]
    size = len(b) // k
    return [tuple(sorted(perm[i * size:(i + 1) * size])) for i in range(k)]


@dataclass(frozen=True)
class StarMatching:
    """``assignment[i]``: the k right indices attached to left vertex ``i``."""

    assignment: tuple
    k: int

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i, js in enumerate(self.assignment) for j in js]


def star_matching_problems(h: BipartiteGraph, sm: StarMatching) -> list[str]:
    problems = []
    used: set = set()
    for i, js in enumerate(sm.assignment):
        if len(js) != sm.k:
            problems.append(f"left {i} has {len(js)} partners, expected {sm.k}")
        for j in js:
            if not h.adj[i, j]:
                problems.append(f"({i}, {j}) is not an edge")
            if j in used:
                problems.append(f"right {j} used twice")
            used.add(j)
    if len(used) != h.shape[1]:
        problems.append(f"{h.shape[1] - len(used)} right vertices unused")
    return problems


def sample_star_matching(h: BipartiteGraph, k: int, seed=None, sub_degree: float = 0.75,
                         max_tries: int = 100) -> StarMatching:
    """Random K_{1,k}-perfect matching with star centres on the left.

    The right side is split uniformly into ``k`` blocks of size ``|A|``; the
    split is redrawn until every block gives a bipartite graph of relative
    minimum degree at least ``sub_degree`` on both sides that has a perfect
    matching. One random perfect matching per block is then taken.
    """
    nA, nB = h.shape
    if nB != k * nA:
        raise MatchingError(f"|B| = {nB} must equal k |A| = {k * nA}")
    rng = as_rng(seed)
    if nA == 0:
        return StarMatching((), k)
    for _ in range(max_tries):
        blocks = equipartition_right(range(nB), k, rng)
        subs = [h.restrict_right(block) for block in blocks]
        if all(min(s.min_degree_fractions()) >= sub_degree - 1e-9 and has_perfect_matching(s)
               for s in subs):
            break
    else:
        raise MatchingError(f"no admissible equipartition in {max_tries} tries")
    assignment = [[] for _ in range(nA)]
    for block, s in zip(blocks, subs):
        for i, j in enumerate(sample_perfect_matching(s, rng)):
            assignment[i].append(block[j])
    return StarMatching(tuple(tuple(sorted(js)) for js in assignment), k)


def pad_right(h: BipartiteGraph, k: int) -> tuple[BipartiteGraph, int]:
    """Append dummy right vertices adjacent to everything so that ``|B| = k |A|``.

    Returns the padded graph and the number of dummies; dummies carry the label
    ``None`` and are dropped by :func:`strip_dummies`.
    """
    nA, nB = h.shape
    extra = k * nA - nB
    if extra < 0:
        raise MatchingError(f"|B| = {nB} already exceeds k |A| = {k * nA}")
    adj = np.hstack([h.adj, np.ones((nA, extra), dtype=bool)])
    return BipartiteGraph(adj, h.left, h.right + (None,) * extra), extra


def strip_dummies(h: BipartiteGraph, sm: StarMatching) -> dict:
    """Label-level assignment with padding vertices removed."""
    return {
        h.left[i]: tuple(h.right[j] for j in js if h.right[j] is not None)
        for i, js in enumerate(sm.assignment)
    }
