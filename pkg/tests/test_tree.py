import math
import random

import mpmath
import numpy as np
import pytest
from oracles import all_nodes, minimax_tree, random_microtree, vstage

from mgss2.dist import NormalParams, backup_min
from mgss2.tree import (INF, MAX, MIN, PathContext, SearchNode, SearchTree, backup_path,
                        compose_f, delta_bound, g_map, gamma_bound, is_relevant,
                        node_value, relevance_tests, sibling_bound)

Q = NormalParams(1.0, 0.5)


def exact(v, kind=MAX):
    return SearchNode(kind, 0, exact_value=v)


def attach(parent, child):
    parent.pending.pop()
    child.parent = parent
    parent.children.append(child)
    return child


def make(kind, n, q, *children):
    node = SearchNode(kind, n, q)
    for c in children:
        attach(node, c)
    return node


def tree_of(*top, table):
    root = SearchNode(MAX, len(top), NormalParams(0.0, 0.0))
    for t in top:
        attach(root, t)
    tree = SearchTree(root, table)
    tree.refresh()
    return tree


def t1(a, table):
    b = make(MIN, 3, Q, exact(0.8), exact(1.2))
    return tree_of(exact(a, MIN), b, table=table), b


# -- node values ------------------------------------------------------------

def test_min_node_fully_expanded_is_min(table):
    node = make(MIN, 2, Q, exact(0.8), exact(1.2))
    assert node_value(node, table) == 0.8


def test_t1_value(table):
    _, b = t1(0.9, table)
    z = (0.8 - 1.0) / 0.5
    oracle = 1.0 + 0.5 * float(z * (1 - mpmath.ncdf(z)) - mpmath.npdf(z))
    assert b.value == pytest.approx(oracle, abs=1e-6)


def test_exact_value():
    assert exact(3.5).value == 3.5


def test_unexpanded_value_is_expected_extremum(table):
    from mgss2.dist import expected_max, expected_min
    assert node_value(SearchNode(MIN, 4, Q), table) == pytest.approx(expected_min(4, Q), abs=1e-9)
    assert node_value(SearchNode(MAX, 4, Q), table) == pytest.approx(expected_max(4, Q), abs=1e-9)


def test_value_invariants_on_microtrees(table):
    rng = random.Random(1)
    for _ in range(50):
        tree = random_microtree(rng, table)
        for node in all_nodes(tree):
            if node.exact:
                continue
            assert node.k + node.l == node.n
            if node.children:
                ext = node.extremum()
                assert (node.value <= ext + 1e-12) if node.kind == MIN else (node.value >= ext - 1e-12)


def test_all_expanded_equals_minimax(table):
    rng = random.Random(2)
    for _ in range(30):
        nested = [_random_nested(rng, 2) for _ in range(rng.randint(2, 3))]
        tree = tree_of(*[_to_nodes(t, MIN) for t in nested], table=table)
        for i, sub in enumerate(nested):
            assert tree.top[i].value == minimax_tree(sub, maximize=False)
        b, alpha, _ = tree.best()
        assert alpha == minimax_tree(nested)


def _random_nested(rng, depth):
    if depth == 0 or rng.random() < 0.2:
        return round(rng.gauss(0, 1), 6)
    return [_random_nested(rng, depth - 1) for _ in range(rng.randint(2, 3))]


def _to_nodes(t, kind):
    if isinstance(t, float):
        return exact(t, kind)
    return make(kind, len(t), NormalParams(0.0, 1.0), *[_to_nodes(c, -kind) for c in t])


# -- paths and compositions -------------------------------------------------

def test_empty_path_is_identity(table):
    path = PathContext([], 0.0, -1.0)
    assert compose_f(path, 0.37, table) == 0.37


def test_pass_through_max_stage(table):
    parent = make(MAX, 2, Q, exact(0.1, MIN))
    child = SearchNode(MIN, 2, Q)
    attach(parent, child)
    parent.children.remove(parent.children[0])  # the target is now the only child
    path = PathContext([], 0.0, -1.0).extend(parent, child)
    assert path.entries[0].bound == -INF
    for x in (-2.0, 0.3, 5.0):
        assert compose_f(path, x, table) == x


def test_compose_matches_recomputation(table):
    rng = random.Random(3)
    for _ in range(40):
        tree = random_microtree(rng, table)
        for node, path in tree.walk(relevant_only=False):
            x = node.value + rng.gauss(0, 1)
            ref = np.array([x])
            cur = node
            while cur.parent is not tree.root:
                p = cur.parent
                other = sibling_bound(p, cur)
                m = np.minimum(ref, other) if p.kind == MIN else np.maximum(ref, other)
                ref = vstage(p.kind, p.l, p.q, m, table)
                cur = p
            assert compose_f(path, x, table) == pytest.approx(float(ref[0]), abs=1e-9)


def test_compose_monotone(table):
    rng = random.Random(4)
    for _ in range(30):
        tree = random_microtree(rng, table)
        for node, path in tree.walk(relevant_only=False):
            xs = sorted(rng.gauss(0, 2) for _ in range(6))
            ys = [compose_f(path, x, table) for x in xs]
            assert all(a <= b + 1e-12 for a, b in zip(ys, ys[1:]))


def test_g_map(table):
    _, b = t1(0.9, table)
    assert g_map(b, 1.0, 1, table) == 0.8       # no new minimum
    assert g_map(b, 0.6, 1, table) == 0.6       # t = 0: plain min
    node = make(MIN, 4, Q, exact(0.8))
    assert g_map(node, 0.9, 1, table) == pytest.approx(backup_min(2, Q, 0.8, table))
    assert g_map(node, 0.5, 3, table) == 0.5


def test_sibling_bound(table):
    p = make(MIN, 3, Q, exact(0.9), exact(1.4))
    c = attach(p, exact(2.0))
    assert sibling_bound(p, c) == 0.9
    lone = make(MIN, 2, Q)
    only = attach(lone, exact(1.0))
    assert sibling_bound(lone, only) == INF
    tree, b = t1(0.9, table)
    _, alpha, _ = tree.best()
    assert alpha == 0.9 == sibling_bound(tree.root, b)


# -- gamma, delta and relevance ---------------------------------------------

def gamma_tree(table, x_value=0.3):
    j = SearchNode(MIN, 3, NormalParams(0.0, 1.0))
    m = make(MAX, 2, Q, exact(x_value, MIN))
    attach(m, j)
    t = make(MIN, 1, Q, m)
    tree = tree_of(exact(5.0, MIN), t, table=table)
    return tree, j


def test_gamma_no_max_ancestor(table):
    tree, b = t1(0.9, table)
    assert gamma_bound(tree.path_to(b), b, table) == -INF


def test_gamma_single_max_ancestor(table):
    tree, j = gamma_tree(table)
    path = tree.path_to(j)
    assert gamma_bound(path, j, table) == pytest.approx(0.3, abs=1e-9)
    # raising j only moves the top level once it passes 0.3
    base = compose_f(path, -3.0, table)
    assert compose_f(path, 0.29, table) == base
    assert compose_f(path, 0.31, table) > base


def test_min_node_below_gamma_irrelevant(table):
    tree, j = gamma_tree(table)
    attach(j, exact(0.1))          # min_k = 0.1 < gamma = 0.3
    tree.refresh()
    rel = relevance_tests(tree.path_to(j), j, True, table)
    assert not rel.gamma_ok and not rel.relevant


def test_delta_direct_child(table):
    tree, b = t1(0.9, table)
    assert delta_bound(tree.path_to(b), b, table) == INF


def test_delta_min_ancestor_bound(table):
    j = SearchNode(MAX, 2, Q)
    t = make(MIN, 2, NormalParams(0.0, 0.0), exact(0.7))
    attach(t, j)
    tree = tree_of(exact(0.5, MIN), t, table=table)
    path = tree.path_to(j)
    # pass-through stage (l = 0 at the ancestor) with a sibling at 0.7
    assert delta_bound(path, j, table) == 0.7
    ys = [compose_f(path, x, table) for x in (1.0, 10.0, 1e6)]
    assert max(ys) <= 0.7


def test_delta_below_alpha_irrelevant(table):
    j = SearchNode(MAX, 2, Q)
    t = make(MIN, 2, NormalParams(0.0, 0.0), exact(0.7))
    attach(t, j)
    tree = tree_of(exact(0.9, MIN), t, table=table)
    assert not is_relevant(tree.path_to(j), j, True, table)


def test_max_node_above_sibling_irrelevant(table):
    p = make(MIN, 3, Q, exact(0.5))
    hi = attach(p, exact(0.9))
    tree = tree_of(exact(2.0, MIN), p, table=table)   # p is not the best move
    rel = relevance_tests(tree.path_to(hi), hi, True, table)
    assert not rel.filter_ok


def test_root_children_relevant(table):
    tree, b = t1(0.9, table)
    for node, _ in tree.walk():
        if node.parent is tree.root:
            assert node.relevant is not None


def test_irrelevant_subtrees_skipped(table):
    tree, j = gamma_tree(table)
    attach(j, exact(0.1))
    tree.refresh()
    seen = [n for n, _ in tree.walk()]
    assert j in seen and not j.relevant
    assert j.children[0] not in seen


# -- backups ----------------------------------------------------------------

def test_expansion_without_new_min_raises_value(table):
    tree, b = t1(0.3, table)
    before = b.value
    tree.add_child(b, exact(5.0))
    backup_path(tree, b)
    assert b.value >= before
    assert b.value == 0.8          # last successor drawn: plain min


def test_node_martingale(table):
    node = make(MIN, 5, NormalParams(0.2, 1.1), exact(0.4))
    rng = np.random.default_rng(0)
    u = rng.normal(0.2, 1.1, 100_000)
    after = vstage(MIN, node.l - 1, node.q, np.minimum(u, 0.4), table)
    assert after.mean() == pytest.approx(node_value(node, table), abs=4 * after.std() / 316)


def test_top_level_martingale(table):
    tree, b = t1(0.3, table)
    rng = np.random.default_rng(1)
    u = rng.normal(1.0, 0.5, 100_000)
    after = np.minimum(0.8, u)
    assert after.mean() == pytest.approx(b.value, abs=4 * after.std() / 316)


def test_check_detects_stale_values(table):
    tree, b = t1(0.3, table)
    tree.check()
    b.value += 1.0
    with pytest.raises(AssertionError):
        tree.check()


def test_dump_mentions_every_top_move(table):
    tree, _ = t1(0.3, table)
    text = tree.dump()
    assert text.count("\n") + 1 == tree.size() - 1


def test_path_to_foreign_node(table):
    tree, _ = t1(0.3, table)
    with pytest.raises(ValueError):
        tree.path_to(SearchNode(MIN, 1, Q))


def test_exact_nodes_need_no_q():
    with pytest.raises(ValueError):
        SearchNode(MIN, 2)
    assert math.isinf(SearchNode(MIN, 2, Q).extremum())
