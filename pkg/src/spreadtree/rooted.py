"""Exact spanning embedding of a small tree with a pinned root.

Backtracking places the non-leaf vertices in BFS order (parents first), with a
forward check that every placed vertex keeps enough free neighbours for its
unplaced children. Once the skeleton is placed, the leaves are assigned by a
bipartite matching between leaves and the remaining free host vertices, so
the search is complete while only branching on internal vertices.
"""

from __future__ import annotations

from .graph import Graph, Tree, as_rng


class EmbeddingNotFound(RuntimeError):
    """No embedding exists, or the node budget ran out before one was found."""


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _match(options: list[int]) -> list[int] | None:
    """Perfect assignment of item ``i`` to a bit of ``options[i]`` (Kuhn's algorithm)."""
    owner: dict[int, int] = {}
    taken = 0
    seen = 0

    def augment(i: int) -> bool:
        nonlocal seen, taken
        avail = options[i] & ~seen
        direct = avail & ~taken
        if direct:
            low = direct & -direct
            owner[low.bit_length() - 1] = i
            taken |= low
            return True
        while avail:
            low = avail & -avail
            avail ^= low
            if seen & low:
                continue
            seen |= low
            h = low.bit_length() - 1
            if augment(owner[h]):
                owner[h] = i
                return True
        return False

    for i in range(len(options)):
        seen = 0
        if not augment(i):
            return None
    result = [0] * len(options)
    for h, i in owner.items():
        result[i] = h
    return result


def _search(g: Graph, hostset, t: Tree, root: int, v: int, budget: int, rng) -> dict:
    hostset = set(int(u) for u in hostset)
    hostset.discard(v)
    if len(hostset) + 1 != t.n:
        raise ValueError(f"need |hostset + v| = |T| = {t.n}, got {len(hostset) + 1}")
    if not 0 <= v < g.n or any(not 0 <= u < g.n for u in hostset):
        raise ValueError("host vertex out of range")
    if t.root != root:
        t = t.rerooted(root)
    nbr = g.masks
    children = [list(c) for c in t.children]
    if rng is not None:
        for c in children:
            rng.shuffle(c)
    order = [root]
    for x in order:
        order.extend(children[x])
    internal = [x for x in order[1:] if children[x]]
    leaves = [x for x in order[1:] if not children[x]]
    if rng is not None:
        leaves = [leaves[i] for i in rng.permutation(len(leaves))]
    parent = t.parent

    phi = [-1] * t.n
    phi[root] = v
    remaining = [len(c) for c in children]
    nodes = 0

    def feasible(free: int, open_: list[int]) -> bool:
        return all((nbr[phi[y]] & free).bit_count() >= remaining[y] for y in open_ if remaining[y])

    def _random_leaves(free: int) -> bool:
        # one uniform greedy pass; the matching below only covers its dead ends
        picks = []
        for x in leaves:
            opts = _bits(nbr[phi[parent[x]]] & free)
            if not opts:
                return False
            h = opts[int(rng.integers(len(opts)))]
            picks.append(h)
            free &= ~(1 << h)
        for x, h in zip(leaves, picks):
            phi[x] = h
        return True

    def place_leaves(free: int) -> bool:
        nonlocal nodes
        nodes += len(leaves)
        if rng is not None and _random_leaves(free):
            return True
        options = [nbr[phi[parent[x]]] & free for x in leaves]
        assignment = _match(options)
        if assignment is None:
            return False
        for x, h in zip(leaves, assignment):
            phi[x] = h
        return True

    def extend(k: int, free: int, open_: list[int]) -> bool:
        nonlocal nodes
        if k == len(internal):
            return place_leaves(free)
        x = internal[k]
        p = parent[x]
        cands = _bits(nbr[phi[p]] & free)
        if rng is not None:
            cands = [cands[i] for i in rng.permutation(len(cands))]
        else:
            cands.sort(key=lambda h: -(nbr[h] & free).bit_count())
        remaining[p] -= 1
        for h in cands:
            nodes += 1
            if nodes > budget:
                raise EmbeddingNotFound(f"search budget of {budget} nodes exhausted")
            rest = free & ~(1 << h)
            phi[x] = h
            if feasible(rest, open_ + [x]) and extend(k + 1, rest, open_ + [x]):
                return True
        phi[x] = -1
        remaining[p] += 1
        return False

    free = sum(1 << u for u in hostset)
    if not feasible(free, [root]) or not extend(0, free, [root]):
        raise EmbeddingNotFound("tree does not embed into the host set with the root pinned")
    return {x: phi[x] for x in range(t.n)}


def embed_rooted_tree(g: Graph, hostset, t: Tree, root: int, v: int,
                      budget: int = 10 ** 7) -> dict:
    """Embed ``t`` onto ``hostset + v`` with ``root -> v``, or raise :class:`EmbeddingNotFound`."""
    return _search(g, hostset, t, root, v, budget, None)


def embed_rooted_tree_randomized(g: Graph, hostset, t: Tree, root: int, v: int, seed=None,
                                 budget: int = 10 ** 7) -> dict:
    """As :func:`embed_rooted_tree`, with child and candidate orders shuffled by ``seed``."""
    return _search(g, hostset, t, root, v, budget, as_rng(seed))
