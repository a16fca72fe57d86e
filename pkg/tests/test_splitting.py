import networkx as nx
import pytest
from hypothesis import given, strategies as st

from spreadtree.graph import Tree, gen_bounded_tree
from spreadtree.splitting import (
    SplittingError,
    TreeSplitting,
    bag_graph,
    bag_tree,
    format_bagtree,
    format_splitting,
    parse_splitting,
    split_once,
    splitting_problems,
    tree_splitting,
)

import oracles


def path_tree(n):
    return Tree([-1] + list(range(n - 1)))


def star_tree(leaves):
    return Tree([-1] + [0] * leaves)


def check_split(t, anchor, m, t1, t2):
    assert not splitting_problems(t, [t1, t2])
    assert anchor in t1
    assert m <= len(t2) <= 3 * m


def test_split_once_path():
    t = path_tree(10)
    t1, t2 = split_once(t, 0, 3)
    check_split(t, 0, 3, t1, t2)
    # the cut oracle confirms a valid split exists and contains ours
    cuts = set(oracles.all_single_vertex_cuts(t, 0))
    assert any(3 <= len(b) <= 9 for _, b in cuts)
    assert (t1, t2) in cuts


def test_split_once_star():
    t = star_tree(5)
    t1, t2 = split_once(t, 0, 1)
    check_split(t, 0, 1, t1, t2)
    assert (t1, t2) in set(oracles.all_single_vertex_cuts(t, 0))
    assert len(t2) <= 3


def test_split_once_rejects_large_m():
    with pytest.raises(SplittingError):
        split_once(path_tree(2), 0, 1)
    with pytest.raises(SplittingError):
        split_once(path_tree(9), 0, 4)


@given(st.integers(3, 150), st.integers(2, 5), st.integers(0, 10 ** 6), st.data())
def test_split_once_property(n, cap, seed, data):
    t = gen_bounded_tree(n, cap, seed=seed)
    m = data.draw(st.integers(1, n // 3))
    anchor = data.draw(st.integers(0, n - 1))
    t1, t2 = split_once(t, anchor, m)
    check_split(t, anchor, m, t1, t2)


def test_tree_splitting_path():
    t = path_tree(10)
    s = tree_splitting(t, 3)
    assert not splitting_problems(t, s.pieces, 3)
    assert sum(len(p) - 1 for p in s.pieces) == 9


def test_tree_splitting_m_equals_n_is_whole_tree():
    t = gen_bounded_tree(17, 3, seed=1)
    s = tree_splitting(t, 17)
    assert s.pieces == (frozenset(range(17)),)
    with pytest.raises(SplittingError):
        tree_splitting(t, 18)


@given(st.integers(1, 200), st.integers(2, 5), st.integers(0, 10 ** 6), st.integers(1, 10))
def test_tree_splitting_property(n, cap, seed, m):
    t = gen_bounded_tree(n, cap, seed=seed)
    m = min(m, n)
    s = tree_splitting(t, m)
    assert not splitting_problems(t, s.pieces, m)


def test_bag_graph_of_path_segments_is_path():
    t = path_tree(10)
    s = TreeSplitting(t, (frozenset(range(0, 4)), frozenset(range(3, 7)), frozenset(range(6, 10))))
    assert not splitting_problems(t, s.pieces)
    assert sorted(bag_graph(s).edges()) == [(0, 1), (1, 2)]
    bt = bag_tree(s, 0)
    assert bt.parent == (3, 0, 1, -1)
    assert bt.shared == (0, 3, 6, -1)


def test_single_piece_bag_graph():
    t = gen_bounded_tree(8, 3, seed=0)
    s = tree_splitting(t, 8)
    assert bag_graph(s).n == 1 and bag_graph(s).m == 0
    bt = bag_tree(s, 5)
    assert bt.parent == (1, -1) and bt.shared == (5, -1)


@given(st.integers(2, 150), st.integers(2, 5), st.integers(0, 10 ** 6), st.integers(2, 8), st.data())
def test_bag_graph_and_tree_properties(n, cap, seed, m, data):
    t = gen_bounded_tree(n, cap, seed=seed)
    m = min(m, n)
    s = tree_splitting(t, m)
    bg = bag_graph(s)
    want = {(i, j) for i in range(s.ell) for j in range(i + 1, s.ell) if s.pieces[i] & s.pieces[j]}
    assert set(bg.edges()) == want
    assert nx.is_connected(oracles.to_nx(bg))
    anchor = data.draw(st.integers(0, n - 1))
    bt = bag_tree(s, anchor)
    tree = nx.Graph([(i, p) for i, p in enumerate(bt.parent) if p >= 0])
    tree.add_nodes_from(range(bt.size))
    assert nx.is_tree(tree)
    for i, p in enumerate(bt.parent):
        if p == -1:
            continue
        x = bt.shared[i]
        assert x in s.pieces[i]
        assert x == anchor if p == bt.star else x in s.pieces[p]
    assert max(bt.degrees()) <= 4 * m * cap
    assert sorted(bt.order) == list(range(bt.size)) and bt.order[0] == bt.star


def test_disconnected_pieces_rejected():
    t = path_tree(6)
    bogus = TreeSplitting(t, (frozenset({0, 1}), frozenset({3, 4})))
    assert splitting_problems(t, bogus.pieces)
    with pytest.raises(SplittingError):
        bag_tree(bogus, 0)


def test_splitting_round_trip():
    t = gen_bounded_tree(60, 3, seed=2)
    s = tree_splitting(t, 5)
    assert parse_splitting(format_splitting(s), t) == s
    lines = format_bagtree(bag_tree(s, t.root)).splitlines()
    assert len(lines) == s.ell + 1 and lines[0].split()[1] == "-1"
