"""Value of computation for single-successor expansions, and the MGSS2 loop.

Expanding node j by s successors replaces its value with G(w), where w is
the extremum of s fresh draws from q_j. Its top-level ancestor then moves to
F(G(w)). For a move other than the current best the benefit is
E[max(0, F(G(w)) - alpha)]; for the best move it is
E[max(0, alpha2 - F(G(w)))], which is the first form on the negated tree.
G is flat beyond j's current extremum, so the expectation splits into a
point mass there and an integral over the region where G moves.
"""
from __future__ import annotations

import logging
import math
import random
import time
from dataclasses import dataclass
from typing import Callable

from . import dist
from .game import GameContract
from .tree import (INF, MAX, MIN, PathContext, SearchNode, SearchTree,
                   backup_path)

log = logging.getLogger(__name__)

EXACT = "exact"
SINGLE_STAGE = "single-stage"


@dataclass(frozen=True)
class VocParams:
    """Cost model and numerical settings for the metareasoning loop.

    ``kappa`` is the cost of one successor evaluation in evaluation units.
    ``batch_sizes`` lists the step sizes s considered per computation; None
    means every s from 1 to the number of unexamined successors.
    """

    kappa: float = 1.0
    batch_sizes: tuple | None = None
    tol: float = 1e-7
    f_mode: str = EXACT
    cap_point_mass: bool = True
    max_expansions: int = 100_000

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be > 0")
        if self.batch_sizes is not None and (not self.batch_sizes or min(self.batch_sizes) < 1):
            raise ValueError("batch sizes must be >= 1")
        if self.f_mode not in (EXACT, SINGLE_STAGE):
            raise ValueError(f"unknown f mode {self.f_mode!r}")

    def sizes(self, l: int) -> list:
        """Step sizes to try on a node with ``l`` unexamined successors."""
        if self.batch_sizes is None:
            return list(range(1, l + 1))
        return sorted(s for s in set(self.batch_sizes) if s <= l) or [l]


@dataclass
class ComputationCandidate:
    node: SearchNode
    path: PathContext
    case: str = ""
    benefit: float = 0.0
    s: int = 1
    net: float = -INF
    bound: float = 0.0

    @property
    def key(self):
        """Ordering for selection: higher net, then shallower, then older."""
        return (self.net, -self.node.depth, -self.node.order)


def _single_stage_setup(path: PathContext, stages: list, threshold: float,
                        delta: float, table: dist.BackupTable):
    """Clamp range of the min/max filters and the most critical b stage."""
    lo, hi = -INF, INF
    crit, best_gap = -1, INF
    for i in range(0, len(stages), 5):
        kind, l, mu, sigma, bound = stages[i:i + 5]
        if kind == MIN:
            lo, hi = min(lo, bound), min(hi, bound)
        else:
            lo, hi = max(lo, bound), max(hi, bound)
        if l == 0 or sigma == 0.0:
            continue
        sat = table.kernel.stage(kind, l, mu, sigma, INF if kind == MIN else -INF)
        gap = max(threshold - sat, sat - delta, 0.0)
        if gap < best_gap:
            crit, best_gap = i // 5, gap
    return crit, lo, hi


def _problem(path: PathContext, node: SearchNode):
    """The target in the orientation where gains mean raising the top value."""
    reflect = path.under_best
    sign = -1.0 if reflect else 1.0
    kind = -node.kind if reflect else node.kind
    anchor = sign * node.extremum()
    return reflect, sign, kind, anchor


def expected_benefit(path: PathContext, node: SearchNode, s: int = 1,
                     params: VocParams | None = None,
                     table: dist.BackupTable | None = None) -> float:
    """Expected improvement in the move decision from drawing ``s`` more successors.

    ``node`` must be relevant (all four tests) and have at least ``s``
    unexamined successors.
    """
    return benefit_and_case(path, node, s, params, table)[0]


def benefit_and_case(path: PathContext, node: SearchNode, s: int = 1,
                     params: VocParams | None = None,
                     table: dist.BackupTable | None = None) -> tuple[float, str]:
    params = params or VocParams()
    table = table or dist.default_table()
    if node.exact or s < 1 or s > node.l:
        raise ValueError(f"cannot expand {s} successor(s) of {node!r}")
    reflect, sign, kind, anchor = _problem(path, node)
    stages = path.stages(reflect)
    threshold = path.threshold
    q = node.q
    mu = sign * q.mean
    t = node.l - s

    crit, lo, hi = -2, -INF, INF
    delta = table.kernel.compose(stages, INF)
    if params.f_mode == SINGLE_STAGE:
        crit, lo, hi = _single_stage_setup(path, stages, threshold, delta, table)

    peak = _top(table, kind, t, mu, q.std, anchor, INF, stages, crit, lo, hi)
    where = "best" if path.under_best else "other"
    kname = "max" if node.kind == MAX else "min"
    if peak <= threshold:
        return 0.0, f"I/{where}/{kname}"
    case = "III" if peak >= delta else "II"
    value = table.kernel.benefit(kind, node.l, s, mu, q.std, anchor, stages,
                                 threshold, crit, lo, hi, params.tol)
    if not params.cap_point_mass and math.isfinite(anchor) and q.std > 0:
        # point-mass term with the filter-free composition (no delta cap)
        free = [x for i in range(0, len(stages), 5)
                for x in (stages[i], stages[i + 1], stages[i + 2], stages[i + 3],
                          INF if stages[i] == MIN else -INF)]
        za = (anchor - mu) / q.std
        mass = (float(dist.special.ndtr(-za)) if kind == MIN else float(dist.special.ndtr(za))) ** s
        capped = _top(table, kind, t, mu, q.std, anchor, anchor, stages, -2, lo, hi)
        uncapped = _top(table, kind, t, mu, q.std, anchor, anchor, free, -2, lo, hi)
        value += mass * (max(uncapped - threshold, 0.0) - max(capped - threshold, 0.0))
    return max(value, 0.0), f"{case}/{where}/{kname}"


def _top(table, kind, t, mu, sigma, anchor, w, stages, crit, lo, hi) -> float:
    if kind == MIN:
        y = table.kernel.bmin(t, mu, sigma, min(anchor, w))
    else:
        y = table.kernel.bmax(t, mu, sigma, max(anchor, w))
    if crit == -2:
        return table.kernel.compose(stages, y)
    return table.kernel.compose_single(stages, y, crit, lo, hi)


def optimistic_bound(path: PathContext, node: SearchNode, s: int = 1,
                     table: dist.BackupTable | None = None) -> float:
    """Largest gain any outcome of expanding ``s`` successors of ``node`` could produce."""
    table = table or dist.default_table()
    reflect, sign, kind, anchor = _problem(path, node)
    stages = path.stages(reflect)
    peak = _top(table, kind, node.l - s, sign * node.q.mean, node.q.std, anchor, INF,
                stages, -2, -INF, INF)
    return max(peak - path.threshold, 0.0)


def optimistic_net(path: PathContext, node: SearchNode, params: VocParams,
                   table: dist.BackupTable | None = None) -> float:
    sizes = params.sizes(node.l)
    return max(optimistic_bound(path, node, s, table) - params.kappa * s for s in sizes)


def net_value(candidate: ComputationCandidate, params: VocParams) -> float:
    return candidate.benefit - params.kappa * candidate.s


def score(candidate: ComputationCandidate, params: VocParams,
          table: dist.BackupTable | None = None) -> ComputationCandidate:
    """Fill in benefit, s and net value, picking the best benefit per successor."""
    node = candidate.node
    best_rate = -1.0
    for s in params.sizes(node.l):
        b, case = benefit_and_case(candidate.path, node, s, params, table)
        if b / s > best_rate:
            best_rate = b / s
            candidate.benefit, candidate.case, candidate.s = b, case, s
    candidate.net = net_value(candidate, params)
    return candidate


class BenefitCache:
    """Remembers benefits until the inputs that determine them change."""

    def __init__(self):
        self._store: dict = {}
        self.hits = 0
        self.misses = 0

    @staticmethod
    def signature(node: SearchNode, path: PathContext) -> tuple:
        return (node.l, node.extremum(), node.q, path.under_best, path.threshold,
                tuple(path.stages()))

    def get(self, node, path):
        hit = self._store.get(node.order)
        if hit is not None and hit[0] == self.signature(node, path):
            self.hits += 1
            return hit[1]
        self.misses += 1
        return None

    def put(self, node, path, candidate):
        self._store[node.order] = (self.signature(node, path),
                                   (candidate.benefit, candidate.case, candidate.s))


def select_computation(tree: SearchTree, params: VocParams,
                       cache: BenefitCache | None = None,
                       trace: list | None = None) -> ComputationCandidate | None:
    """Highest-net-value expansion over the relevant frontier, or None to stop.

    Candidates are visited in decreasing order of an optimistic gain bound;
    the scan stops once no remaining candidate could beat the best net value
    found so far.
    """
    frontier = tree.frontier()
    if not frontier:
        return None
    cands = []
    for node, path in frontier:
        c = ComputationCandidate(node, path)
        c.bound = optimistic_net(path, node, params, tree.table)
        cands.append(c)
    cands.sort(key=lambda c: (-c.bound, c.node.depth, c.node.order))
    best = None
    for c in cands:
        if best is not None and c.bound < best.net:
            break
        hit = cache.get(c.node, c.path) if cache is not None else None
        if hit is not None:
            c.benefit, c.case, c.s = hit
            c.net = net_value(c, params)
        else:
            score(c, params, tree.table)
            if cache is not None:
                cache.put(c.node, c.path, c)
        if trace is not None:
            trace.append(c)
        if best is None or c.key > best.key:
            best = c
    if best is None or best.net <= 0.0:
        return None
    return best


# ---------------------------------------------------------------------------
# the control loop over a real game

@dataclass
class SearchStats:
    evaluations: int = 0
    iterations: int = 0
    candidates: int = 0
    stop_reason: str = ""
    wall_time: float = 0.0
    tree_size: int = 0

    def as_dict(self) -> dict:
        return dict(evaluations=self.evaluations, iterations=self.iterations,
                    candidates=self.candidates, stop_reason=self.stop_reason,
                    wall_time=round(self.wall_time, 6), tree_size=self.tree_size)


class NodeFactory:
    """Creates statically evaluated search nodes for game states."""

    def __init__(self, game: GameContract, calibration, root_player: int,
                 rng: random.Random, order_hook: Callable | None = None):
        self.game = game
        self.calibration = calibration
        self.root_player = root_player
        self.rng = rng
        self.order_hook = order_hook
        self.evaluations = 0

    def make(self, state, move=None) -> SearchNode:
        game = self.game
        kind = MAX if game.to_move(state) == self.root_player else MIN
        self.evaluations += 1
        if game.is_terminal(state):
            return SearchNode(kind, 0, state=state, move=move,
                              exact_value=game.terminal_score(state, self.root_player))
        moves = game.successors(state)
        static = game.evaluate(state, self.root_player)
        q = self.calibration.q_for(game.phase(state), len(moves), static, kind)
        if self.order_hook is not None:
            # hook orders best-first; pending is consumed from the end
            moves = list(reversed(self.order_hook(state, moves)))
        else:
            self.rng.shuffle(moves)
        return SearchNode(kind, len(moves), q, state=state, move=move,
                          static=static, pending=moves)

    def expand(self, tree: SearchTree, node: SearchNode) -> SearchNode:
        move = node.pending[-1]
        child = self.make(self.game.apply_move(node.state, move), move)
        return tree.add_child(node, child)


def build_root(game: GameContract, state, factory: NodeFactory,
               table: dist.BackupTable | None = None) -> SearchTree:
    """Root with every top-level move generated and statically evaluated."""
    moves = game.successors(state)
    root = SearchNode(MAX, len(moves), dist.NormalParams(0.0, 0.0), state=state,
                      pending=list(reversed(moves)))
    tree = SearchTree(root, table or dist.default_table())
    while root.pending:
        factory.expand(tree, root)
    return tree


def mgss2_search(game: GameContract, state, calibration, params: VocParams | None = None,
                 rng: random.Random | None = None, table: dist.BackupTable | None = None,
                 order_hook: Callable | None = None, trace: list | None = None,
                 check: bool = False):
    """Choose a move by repeatedly taking the best positive-net-value expansion.

    Returns ``(move, stats, tree)``; ``tree`` is None for forced moves.
    """
    params = params or VocParams()
    rng = rng or random.Random(0)
    table = table or dist.default_table()
    start = time.perf_counter()
    stats = SearchStats()
    if game.is_terminal(state):
        raise ValueError("no move to choose in a terminal position")
    moves = game.successors(state)
    if len(moves) == 1:
        stats.stop_reason = "forced"
        stats.wall_time = time.perf_counter() - start
        return moves[0], stats, None

    factory = NodeFactory(game, calibration, game.to_move(state), rng, order_hook)
    tree = build_root(game, state, factory, table)
    cache = BenefitCache()
    while True:
        if factory.evaluations >= params.max_expansions:
            stats.stop_reason = "budget"
            break
        steps: list | None = [] if trace is not None else None
        cand = select_computation(tree, params, cache, steps)
        if steps is not None:
            trace.append([(c.node.move, c.node.depth, c.case, c.benefit, c.net) for c in steps])
        if cand is None:
            stats.stop_reason = "no positive net value"
            break
        stats.iterations += 1
        for _ in range(cand.s):
            factory.expand(tree, cand.node)
        backup_path(tree, cand.node)
        if check:
            tree.check()
    stats.candidates = cache.misses + cache.hits
    b, _, _ = tree.best()
    stats.evaluations = factory.evaluations
    stats.tree_size = tree.size()
    stats.wall_time = time.perf_counter() - start
    return tree.top[b].move, stats, tree
