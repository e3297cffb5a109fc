"""Fixed-depth alpha-beta, the baseline searcher.

Node counts are successor states created and statically evaluated, the same
unit MGSS2 reports.
"""
from __future__ import annotations

from dataclasses import dataclass

from .game import GameContract

INF = float("inf")


@dataclass(frozen=True)
class AbConfig:
    depth: int = 2
    ordering: str = "static"  # "static" or "none"

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("alpha-beta depth must be >= 1")
        if self.ordering not in ("static", "none"):
            raise ValueError(f"unknown ordering {self.ordering!r}")


@dataclass
class AbResult:
    move: object
    value: float
    nodes: int = 0
    leaves: int = 0


class _Search:
    def __init__(self, game: GameContract, root_player: int, ordering: str):
        self.game = game
        self.root_player = root_player
        self.ordering = ordering
        self.nodes = 0
        self.leaves = 0

    def children(self, state, remaining: int, maximize: bool):
        game = self.game
        kids = []
        for m in game.successors(state):
            kids.append((m, game.apply_move(state, m)))
        self.nodes += len(kids)
        if self.ordering == "static" and remaining >= 2 and len(kids) > 1:
            # static values of interior successors are computed anyway by the
            # evaluator; reuse them only to order, ties keep generation order
            keyed = [(self.value_of(s), i) for i, (_, s) in enumerate(kids)]
            keyed.sort(key=lambda t: (-t[0], t[1]) if maximize else (t[0], t[1]))
            kids = [kids[i] for _, i in keyed]
        return kids

    def value_of(self, state) -> float:
        game = self.game
        if game.is_terminal(state):
            return game.terminal_score(state, self.root_player)
        return game.evaluate(state, self.root_player)

    def search(self, state, depth: int, alpha: float, beta: float) -> float:
        game = self.game
        if depth == 0 or game.is_terminal(state):
            self.leaves += 1
            return self.value_of(state)
        maximize = game.to_move(state) == self.root_player
        if maximize:
            best = -INF
            for _, child in self.children(state, depth, True):
                best = max(best, self.search(child, depth - 1, alpha, beta))
                alpha = max(alpha, best)
                if alpha >= beta:
                    break
            return best
        best = INF
        for _, child in self.children(state, depth, False):
            best = min(best, self.search(child, depth - 1, alpha, beta))
            beta = min(beta, best)
            if alpha >= beta:
                break
        return best


def alphabeta_search(game: GameContract, state, config: AbConfig | None = None) -> AbResult:
    """Best move from ``state`` for the side to move (earliest move wins ties).

    A forced move is returned after generating its one successor; the value
    reported then is that successor's static value.
    """
    config = config or AbConfig()
    if game.is_terminal(state):
        raise ValueError("no move to choose in a terminal position")
    root_player = game.to_move(state)
    s = _Search(game, root_player, config.ordering)
    moves = game.successors(state)
    if len(moves) == 1:
        return AbResult(moves[0], s.value_of(game.apply_move(state, moves[0])), 1, 1)
    best_move, alpha = None, -INF
    for move, child in s.children(state, config.depth, True):
        v = s.search(child, config.depth - 1, alpha, INF)
        if v > alpha or best_move is None:
            best_move, alpha = move, v
    return AbResult(best_move, alpha, s.nodes, s.leaves)
