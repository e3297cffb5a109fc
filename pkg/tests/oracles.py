"""Brute-force reference implementations shared by the test modules."""
from __future__ import annotations

import random

import numpy as np

from mgss2.dist import NormalParams
from mgss2.tree import MAX, MIN, SearchNode, SearchTree, sibling_bound


# ---------------------------------------------------------------------------
# random micro-trees

def _attach(parent: SearchNode, child: SearchNode) -> None:
    parent.pending.pop()
    child.parent = parent
    parent.children.append(child)


def _random_node(rng: random.Random, kind: int, depth: int, max_depth: int,
                 branching: int) -> SearchNode:
    if depth > 1 and rng.random() < 0.15:
        return SearchNode(kind, 0, exact_value=round(rng.gauss(0.0, 1.0), 6))
    n = rng.randint(1, branching)
    k = 0 if depth >= max_depth else rng.randint(0, n)
    q = NormalParams(rng.gauss(0.0, 0.7), rng.uniform(0.3, 1.5))
    node = SearchNode(kind, n, q)
    for _ in range(k):
        _attach(node, _random_node(rng, -kind, depth + 1, max_depth, branching))
    return node


def random_microtree(rng: random.Random, table, max_depth: int = 3,
                     branching: int = 4) -> SearchTree:
    """Root MAX with 2..branching top-level moves; nodes at most ``max_depth`` deep."""
    n = rng.randint(2, branching)
    root = SearchNode(MAX, n, NormalParams(0.0, 0.0))
    for _ in range(n):
        _attach(root, _random_node(rng, MIN, 1, max_depth, branching))
    tree = SearchTree(root, table)
    tree.refresh()
    return tree


def all_nodes(tree: SearchTree):
    stack = list(reversed(tree.top))
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


# ---------------------------------------------------------------------------
# vectorized backups and the Monte Carlo value of an expansion

def vstage(kind: int, l: int, q: NormalParams, m: np.ndarray, table) -> np.ndarray:
    """b< / b> applied elementwise to an array of truncation points."""
    if l == 0:
        return m
    if q.std == 0.0:
        return np.minimum(m, q.mean) if kind == MIN else np.maximum(m, q.mean)
    if kind == MIN:
        return q.mean + q.std * table.evaluate(l, (m - q.mean) / q.std)
    return q.mean - q.std * table.evaluate(l, (q.mean - m) / q.std)


def simulate_expansion(tree: SearchTree, node: SearchNode, s: int, trials: int,
                       rng: np.random.Generator):
    """Top-level values after drawing ``s`` successors of ``node``, per trial.

    Every ancestor is recomputed from scratch with the other children held
    fixed. Returns (top values array of shape (trials, n_top), index of the
    changed top-level move).
    """
    table = tree.table
    draws = rng.normal(node.q.mean, node.q.std, size=(trials, s))
    anchor = node.extremum()
    if node.kind == MIN:
        m = np.minimum(draws.min(axis=1), anchor)
    else:
        m = np.maximum(draws.max(axis=1), anchor)
    v = vstage(node.kind, node.l - s, node.q, m, table)
    cur = node
    while cur.parent is not tree.root:
        p = cur.parent
        other = sibling_bound(p, cur)
        m = np.minimum(v, other) if p.kind == MIN else np.maximum(v, other)
        v = vstage(p.kind, p.l, p.q, m, table)
        cur = p
    idx = tree.top.index(cur)
    tops = np.tile([c.value for c in tree.top], (trials, 1))
    tops[:, idx] = v
    return tops, idx


def mc_benefit(tree: SearchTree, node: SearchNode, s: int = 1, trials: int = 100_000,
               seed: int = 0) -> tuple[float, float]:
    """E[max_i v'_i - v'_{old best}] and its standard error."""
    rng = np.random.default_rng(seed)
    tops, _ = simulate_expansion(tree, node, s, trials, rng)
    b, _, _ = tree.best()
    gain = tops.max(axis=1) - tops[:, b]
    return float(gain.mean()), float(gain.std() / np.sqrt(trials))


def argmax_changes(tree: SearchTree, node: SearchNode, s: int, trials: int = 100_000,
                   seed: int = 0) -> int:
    """Number of trials in which the best top-level move differs afterwards."""
    rng = np.random.default_rng(seed)
    tops, _ = simulate_expansion(tree, node, s, trials, rng)
    b, _, _ = tree.best()
    # strict improvement over the old best is what changes the decision
    return int(np.count_nonzero(tops.max(axis=1) > tops[:, b]))


# ---------------------------------------------------------------------------
# Othello flanking rule, square by square

def brute_force_moves(me: int, opp: int) -> list[int]:
    moves = []
    for sq in range(64):
        if (me | opp) >> sq & 1:
            continue
        if brute_force_flips(me, opp, sq):
            moves.append(sq)
    return moves


def brute_force_flips(me: int, opp: int, sq: int) -> int:
    r0, c0 = divmod(sq, 8)
    flips = 0
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == dc == 0:
                continue
            r, c, line = r0 + dr, c0 + dc, 0
            while 0 <= r < 8 and 0 <= c < 8 and opp >> (8 * r + c) & 1:
                line |= 1 << (8 * r + c)
                r, c = r + dr, c + dc
            if line and 0 <= r < 8 and 0 <= c < 8 and me >> (8 * r + c) & 1:
                flips |= line
    return flips


def minimax_tree(tree, maximize=True):
    """Minimax value of a nested-list tree (leaves are numbers)."""
    if isinstance(tree, (int, float)):
        return tree
    vals = [minimax_tree(t, not maximize) for t in tree]
    return max(vals) if maximize else min(vals)
