"""Partially expanded search trees with b< / b> backups.

A node of kind MIN (opponent to move) with ``k`` evaluated children and ``l``
unexamined ones is worth ``b<_{l,q}(min of the children)``; with no children
yet it is worth the expected minimum of ``l`` draws from its q. MAX nodes are
the mirror image. The root is a MAX node whose children (the top-level
moves) are all generated up front; the move decision is the argmax over
their values.

The path function F maps a new value of some node ``j`` to the resulting
value of its top-level ancestor, holding everything else fixed. Bounds and
relevance tests below are all statements about F.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

from . import dist
from .dist import NormalParams
from .kernels import MAX_KIND, MIN_KIND

MAX = MAX_KIND
MIN = MIN_KIND
INF = math.inf


class SearchNode:
    __slots__ = ("kind", "state", "move", "parent", "children", "pending", "n",
                 "q", "static", "value", "exact", "depth", "order",
                 "relevant", "gamma", "delta")

    def __init__(self, kind: int, n: int, q: NormalParams | None = None, *,
                 state=None, move=None, static: float = 0.0,
                 pending: list | None = None, exact_value: float | None = None):
        self.kind = kind
        self.state = state
        self.move = move
        self.parent: SearchNode | None = None
        self.children: list[SearchNode] = []
        self.n = n
        self.pending = list(pending) if pending is not None else [None] * n
        self.q = q
        self.static = static
        self.exact = exact_value is not None
        self.value = float(exact_value) if self.exact else math.nan
        self.depth = 0
        self.order = 0
        self.relevant = None
        self.gamma = None
        self.delta = None
        if self.exact:
            self.n = 0
            self.pending = []
        elif n < 1:
            raise ValueError("a non-exact node needs at least one successor")
        elif q is None:
            raise ValueError("a non-exact node needs a successor distribution")

    @property
    def k(self) -> int:
        return len(self.children)

    @property
    def l(self) -> int:
        return len(self.pending)

    @property
    def expandable(self) -> bool:
        return not self.exact and bool(self.pending)

    def extremum(self) -> float:
        """min_k for MIN nodes, max_k for MAX nodes; +-inf with no children."""
        if not self.children:
            return INF if self.kind == MIN else -INF
        vals = [c.value for c in self.children]
        return min(vals) if self.kind == MIN else max(vals)

    def __repr__(self) -> str:
        kind = "max" if self.kind == MAX else "min"
        return (f"SearchNode({kind}, move={self.move!r}, k={self.k}, l={self.l}, "
                f"value={self.value:.4g})")


def node_value(node: SearchNode, table: dist.BackupTable | None = None) -> float:
    """Backed-up value: b<_{l,q}(min_k) / b>_{l,q}(max_k), or the exact score."""
    if node.exact:
        return node.value
    table = table or dist.default_table()
    return stage_value(node.kind, node.l, node.q, node.extremum(), table)


def stage_value(kind: int, l: int, q: NormalParams, m: float,
                table: dist.BackupTable) -> float:
    if l <= table.lmax:
        return table.kernel.stage(kind, l, q.mean, q.std, m)
    if kind == MIN:
        return dist.backup_min(l, q, m, table) if m < INF else dist.expected_min(l, q)
    return dist.backup_max(l, q, m, table) if m > -INF else dist.expected_max(l, q)


def sibling_bound(parent: SearchNode, child: SearchNode) -> float:
    """Extremum of the parent's other evaluated children (+-inf if none)."""
    others = [c.value for c in parent.children if c is not child]
    if parent.kind == MIN:
        return min(others, default=INF)
    return max(others, default=-INF)


def g_map(node: SearchNode, m_s: float, s: int = 1,
          table: dist.BackupTable | None = None) -> float:
    """New value of ``node`` when the extremum of ``s`` new successors is ``m_s``."""
    table = table or dist.default_table()
    t = node.l - s
    if t < 0:
        raise ValueError("cannot draw more successors than remain")
    anchor = node.extremum()
    m = min(anchor, m_s) if node.kind == MIN else max(anchor, m_s)
    return stage_value(node.kind, t, node.q, m, table)


# ---------------------------------------------------------------------------
# paths

@dataclass(frozen=True)
class PathEntry:
    kind: int
    remaining: int
    q: NormalParams
    bound: float


@dataclass
class PathContext:
    """Ancestors of a node from the top-level move (first) to its parent (last).

    ``alpha`` is the value of the current best top-level move, ``alpha2`` of
    the second best; ``under_best`` tells which of the two the node can
    threaten.
    """

    entries: list
    alpha: float
    alpha2: float
    under_best: bool = False
    top: SearchNode | None = None

    def stages(self, reflect: bool = False) -> list:
        """Flat (kind, l, mu, sigma, bound) stages from the parent upwards."""
        flat: list = []
        sign = -1.0 if reflect else 1.0
        for e in reversed(self.entries):
            q = e.q if e.q is not None else NormalParams(0.0, 0.0)
            flat.extend((-e.kind if reflect else e.kind, e.remaining,
                         sign * q.mean, q.std, sign * e.bound))
        return flat

    def extend(self, parent: SearchNode, child: SearchNode) -> "PathContext":
        entry = PathEntry(parent.kind, parent.l,
                          parent.q if parent.q is not None else NormalParams(parent.value, 0.0),
                          sibling_bound(parent, child))
        return PathContext(self.entries + [entry], self.alpha, self.alpha2,
                           self.under_best, self.top)

    @property
    def threshold(self) -> float:
        """The level the reflected/unreflected top value has to beat."""
        return -self.alpha2 if self.under_best else self.alpha


def compose_f(path: PathContext, x: float, table: dist.BackupTable | None = None,
              reflect: bool = False) -> float:
    """F(x): top-level value when the node at the end of ``path`` is worth ``x``."""
    table = table or dist.default_table()
    stages = path.stages(reflect)
    if not reflect:
        return table.kernel.compose(stages, x)
    return -table.kernel.compose(stages, -x)


def _raise_threshold(kind: int, l: int, q: NormalParams, thr: float,
                     table: dist.BackupTable) -> float:
    """Smallest input y with stage(y) > thr, as a threshold on y.

    Returns +inf when no input can clear ``thr`` and -inf when every input
    does (the stage saturates above ``thr``).
    """
    if l == 0:
        return thr
    if q.exact:
        if kind == MIN:
            return thr if q.mean > thr else INF
        return -INF if q.mean > thr else thr
    if kind == MIN:
        try:
            return dist.inverse_backup_min(l, q, thr, table)
        except ValueError:  # thr at or above the saturation value
            return INF
    try:
        return dist.inverse_backup_max(l, q, thr, table)
    except ValueError:  # thr at or below the saturation floor
        return -INF


def gamma_bound(path: PathContext, node: SearchNode | None = None,
                table: dist.BackupTable | None = None, reflect: bool = False) -> float:
    """Level the node's value must exceed before its top-level ancestor can move.

    Each MAX ancestor with sibling bound b passes changes only once the value
    arriving from below exceeds b; that requirement is pulled back through
    the stages in between (inverse b stages and min/max filters). The result
    is the largest of those pulled-back levels (-inf with no such ancestor,
    +inf when some requirement cannot be met). With ``reflect`` the
    computation runs on the negated tree and the result is in negated units.
    """
    table = table or dist.default_table()
    stages = path.entries[::-1]
    sign = -1 if reflect else 1
    gamma = -INF
    for i, anc in enumerate(stages):
        kind = sign * anc.kind
        bound = sign * anc.bound
        if kind != MAX or bound == -INF:
            continue
        thr = bound
        for below in stages[i - 1::-1] if i > 0 else ():
            bkind = sign * below.kind
            bq = below.q if not reflect else below.q.reflected()
            thr = _raise_threshold(bkind, below.remaining, bq, thr, table)
            if thr in (INF, -INF):
                break
            bbound = sign * below.bound
            if bkind == MAX and bbound > thr:
                thr = -INF
                break
            if bkind == MIN and bbound <= thr:
                thr = INF
                break
        gamma = max(gamma, thr)
        if gamma == INF:
            break
    return gamma


def delta_bound(path: PathContext, node: SearchNode | None = None,
                table: dist.BackupTable | None = None, reflect: bool = False) -> float:
    """Highest top-level value an unbounded increase of the node can produce."""
    table = table or dist.default_table()
    return table.kernel.compose(path.stages(reflect), INF)


@dataclass
class Relevance:
    parent_ok: bool
    filter_ok: bool
    gamma_ok: bool
    delta_ok: bool
    gamma: float = math.nan
    delta: float = math.nan

    @property
    def relevant(self) -> bool:
        return self.parent_ok and self.filter_ok and self.gamma_ok and self.delta_ok

    @property
    def local(self) -> bool:
        """Tests 2-4 only (everything but the parent test)."""
        return self.filter_ok and self.gamma_ok and self.delta_ok


def relevance_tests(path: PathContext, node: SearchNode, parent_relevant: bool = True,
                    table: dist.BackupTable | None = None) -> Relevance:
    """The four relevance tests, run in the direction that can change the decision.

    Nodes under a non-best move matter only if they can push their top-level
    value above alpha; nodes under the best move only if they can pull it
    below alpha2. The second case is the first one on the negated tree.
    """
    table = table or dist.default_table()
    reflect = path.under_best
    sign = -1 if reflect else 1
    rel = Relevance(parent_relevant, True, True, True)
    if path.entries:
        parent = path.entries[-1]
        if sign * parent.kind == MIN:
            rel.filter_ok = sign * node.value < sign * parent.bound
    delta = delta_bound(path, node, table, reflect)
    rel.delta = sign * delta
    rel.delta_ok = delta > path.threshold
    if sign * node.kind == MIN and rel.filter_ok and rel.delta_ok:
        reach = sign * (node.extremum() if not node.exact else node.value)
        if reach < INF:
            gamma = gamma_bound(path, node, table, reflect)
            rel.gamma = sign * gamma
            rel.gamma_ok = reach > gamma
    return rel


def is_relevant(path: PathContext, node: SearchNode, parent_relevant: bool = True,
                table: dist.BackupTable | None = None) -> bool:
    return relevance_tests(path, node, parent_relevant, table).relevant


# ---------------------------------------------------------------------------
# the tree

@dataclass
class SearchTree:
    """Root plus bookkeeping; the root is a MAX node with all moves generated."""

    root: SearchNode
    table: dist.BackupTable = field(default_factory=dist.default_table)
    _counter: int = 0

    def __post_init__(self):
        self._number(self.root, 0)

    def _number(self, node: SearchNode, depth: int) -> None:
        node.depth = depth
        node.order = self._counter
        self._counter += 1
        for c in node.children:
            c.parent = node
            self._number(c, depth + 1)

    @property
    def top(self) -> list:
        return self.root.children

    def add_child(self, parent: SearchNode, child: SearchNode) -> SearchNode:
        """Attach a freshly evaluated successor (consumes one pending move)."""
        if not parent.pending:
            raise ValueError("node has no unexamined successors")
        parent.pending.pop()
        child.parent = parent
        child.depth = parent.depth + 1
        child.order = self._counter
        self._counter += 1
        if not child.exact:
            child.value = node_value(child, self.table)
        parent.children.append(child)
        return child

    def refresh(self, node: SearchNode | None = None) -> None:
        """Recompute values bottom-up (whole tree, or from ``node`` to the root)."""
        if node is None:
            self._refresh_all(self.root)
            return
        while node is not None:
            if node is not self.root:
                node.value = node_value(node, self.table)
            node = node.parent

    def _refresh_all(self, node: SearchNode) -> None:
        for c in node.children:
            self._refresh_all(c)
        if node is not self.root:
            node.value = node_value(node, self.table)

    def best(self) -> tuple[int, float, float]:
        """Index of the best top-level move, alpha and alpha2 (first index wins ties)."""
        vals = [c.value for c in self.top]
        if not vals:
            raise ValueError("root has no children")
        b = max(range(len(vals)), key=lambda i: (vals[i], -i))
        rest = [v for i, v in enumerate(vals) if i != b]
        return b, vals[b], max(rest, default=-INF)

    def path_to(self, node: SearchNode) -> PathContext:
        chain = []
        cur = node
        while cur.parent is not None and cur.parent is not self.root:
            chain.append((cur.parent, cur))
            cur = cur.parent
        if cur.parent is not self.root:
            raise ValueError("node is not in this tree")
        b, alpha, alpha2 = self.best()
        path = PathContext([], alpha, alpha2, cur is self.top[b], cur)
        for parent, child in reversed(chain):
            path = path.extend(parent, child)
        return path

    def walk(self, relevant_only: bool = True) -> Iterator[tuple[SearchNode, PathContext]]:
        """Depth-first (node, path) pairs; sets relevance, gamma and delta on nodes.

        With ``relevant_only`` the subtrees of irrelevant nodes are skipped.
        """
        b, alpha, alpha2 = self.best()
        stack = []
        for i in range(len(self.top) - 1, -1, -1):
            top = self.top[i]
            stack.append((top, PathContext([], alpha, alpha2, i == b, top), True))
        while stack:
            node, path, parent_rel = stack.pop()
            rel = relevance_tests(path, node, parent_rel, self.table)
            node.relevant = rel.relevant
            node.gamma = rel.gamma
            node.delta = rel.delta
            yield node, path
            if relevant_only and not rel.relevant:
                continue
            for c in reversed(node.children):
                stack.append((c, path.extend(node, c), rel.relevant))

    def frontier(self) -> list:
        """Relevant nodes that still have unexamined successors, with their paths."""
        return [(n, p) for n, p in self.walk() if n.relevant and n.expandable]

    def size(self) -> int:
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            count += 1
            stack.extend(node.children)
        return count

    def check(self, tol: float = 1e-9) -> None:
        """Debug cross-check: stored values equal a full bottom-up recomputation."""
        stored = {}
        stack = [self.root]
        while stack:
            node = stack.pop()
            stored[id(node)] = node.value
            stack.extend(node.children)
        self.refresh()
        stack = [self.root]
        while stack:
            node = stack.pop()
            old = stored[id(node)]
            if node is not self.root and not (abs(node.value - old) <= tol or
                                              (math.isinf(old) and old == node.value)):
                raise AssertionError(f"stale value at {node!r}: stored {old}")
            stack.extend(node.children)

    def dump(self, relevant_only: bool = False, fmt=None) -> str:
        """Indented text view of values, bounds and relevance."""
        lines = []
        fmt = fmt or str
        for node, _ in self.walk(relevant_only=relevant_only):
            kind = "max" if node.kind == MAX else "min"
            flag = "R" if node.relevant else "-"
            lines.append(
                f"{'  ' * (node.depth - 1)}{fmt(node.move)} {kind} v={node.value:.4f} "
                f"k={node.k} l={node.l} gamma={node.gamma:.4g} delta={node.delta:.4g} {flag}"
                + (" exact" if node.exact else ""))
        return "\n".join(lines)


def backup_path(tree: SearchTree, node: SearchNode) -> None:
    """Propagate a changed node value to the root; alpha/alpha2 follow from the top level."""
    tree.refresh(node)
