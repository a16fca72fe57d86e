"""Colour-respecting random greedy embedding of a rooted tree.

Tree vertices are placed in BFS order from the root. Each vertex goes to a
uniformly random host vertex of its colour class that is adjacent to its
parent's image and still free.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .graph import Graph, Tree, as_rng, meets


class GreedyEmbeddingError(RuntimeError):
    """Some vertex had no admissible image."""


class BudgetExceededError(RuntimeError):
    pass


@dataclass(frozen=True)
class ColouredTree:
    tree: Tree
    colour: Mapping[int, int]  # non-root tree vertex -> class id

    def __post_init__(self):
        keys = set(self.colour)
        want = set(range(self.tree.n)) - {self.tree.root}
        if keys != want:
            raise ValueError("colour must be defined exactly on the non-root vertices")

    @property
    def root(self) -> int:
        return self.tree.root


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _class_masks(classes) -> dict:
    keys = classes.keys() if isinstance(classes, Mapping) else range(len(classes))
    return {k: sum(1 << int(u) for u in classes[k]) for k in keys}


def greedy_embed(host: Graph, classes, ct: ColouredTree, v: int, seed=None) -> dict:
    """Random embedding with ``root -> v`` and every ``i``-coloured vertex inside ``classes[i]``."""
    rng = as_rng(seed)
    nbr = host.masks
    cmask = _class_masks(classes)
    t = ct.tree
    phi = {t.root: v}
    free = ((1 << host.n) - 1) & ~(1 << v)
    for x in t.bfs_order()[1:]:
        options = _bits(nbr[phi[t.parent[x]]] & cmask[ct.colour[x]] & free)
        if not options:
            raise GreedyEmbeddingError(f"no admissible image for tree vertex {x}")
        y = options[int(rng.integers(len(options)))]
        phi[x] = y
        free &= ~(1 << y)
    return phi


def exact_greedy_distribution(host: Graph, classes, ct: ColouredTree, v: int,
                              budget: int = 10 ** 6) -> dict:
    """Exact output law of :func:`greedy_embed`, by walking its whole choice tree.

    Keys are tuples ``images`` with ``images[x]`` the image of tree vertex ``x``;
    the mass of runs that hit an empty admissible set is reported under ``None``.
    Probabilities are exact fractions summing to one.
    """
    nbr = host.masks
    cmask = _class_masks(classes)
    t = ct.tree
    order = t.bfs_order()
    dist: dict = {}
    branches = 0
    images = [-1] * t.n
    images[t.root] = v

    def walk(k: int, free: int, prob: Fraction) -> None:
        nonlocal branches
        branches += 1
        if branches > budget:
            raise BudgetExceededError(f"choice tree exceeds {budget} branches")
        if k == len(order):
            key = tuple(images)
            dist[key] = dist.get(key, 0) + prob
            return
        x = order[k]
        options = _bits(nbr[images[t.parent[x]]] & cmask[ct.colour[x]] & free)
        if not options:
            dist[None] = dist.get(None, 0) + prob
            return
        share = prob / len(options)
        for y in options:
            images[x] = y
            walk(k + 1, free & ~(1 << y), share)
        images[x] = -1

    walk(1, ((1 << host.n) - 1) & ~(1 << v), Fraction(1))
    return dist


def greedy_precondition_problems(host: Graph, classes, ct: ColouredTree, v: int,
                                 eta: float, gamma: float) -> list[str]:
    """Which hypotheses of the greedy spread guarantee fail on this instance."""
    problems = []
    keys = list(classes.keys()) if isinstance(classes, Mapping) else list(range(len(classes)))
    seen: set = set()
    for k in keys:
        if seen & set(classes[k]):
            problems.append(f"class {k} overlaps an earlier class")
        seen |= set(classes[k])
    if seen != set(range(host.n)) - {v}:
        problems.append("classes do not partition the host minus the root image")
    n = host.n
    load: dict = {}
    for x, c in ct.colour.items():
        load[c] = load.get(c, 0) + 1
    for k in keys:
        V = list(classes[k])
        if not meets(len(V), eta, n):
            problems.append(f"class {k} smaller than eta * n")
        deg = host.adj[:, V].sum(axis=1)
        # members of V cannot count themselves
        size = np.full(n, len(V))
        size[V] -= 1
        if not all(meets(d, 1 - gamma, s) for d, s in zip(deg, size)):
            problems.append(f"some vertex has fewer than (1 - gamma)|V_{k}| neighbours in class {k}")
        if load.get(k, 0) > (1 - eta) * len(V) + 1e-9:
            problems.append(f"class {k} receives more than (1 - eta)|V_{k}| tree vertices")
    if set(load) - set(keys):
        problems.append("tree uses a colour with no class")
    return problems


def greedy_spread_bound(eta: float, n: int) -> float:
    """Per-coordinate spread ``2 / (eta^2 n)`` of the greedy embedding."""
    return 2 / (eta ** 2 * n)
