"""The game interface the searchers are written against, plus a tiny explicit-tree game."""
from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any

PASS = -1
MAX_PLAYER = 1
MIN_PLAYER = -1


class GameContract(ABC):
    """What a searcher needs from a two-player zero-sum game.

    Values are in evaluation units and oriented so that positive is good for
    ``root_player`` (one of +1 / -1). Move application is pure.
    """

    @abstractmethod
    def to_move(self, state) -> int: ...

    @abstractmethod
    def legal_moves(self, state) -> list:
        """Moves available to the side to move; empty when it must pass."""

    @abstractmethod
    def apply_move(self, state, move): ...

    @abstractmethod
    def is_terminal(self, state) -> bool: ...

    @abstractmethod
    def terminal_score(self, state, root_player: int) -> float: ...

    @abstractmethod
    def evaluate(self, state, root_player: int) -> float: ...

    def successors(self, state) -> list:
        """Legal moves, ``[PASS]`` for a forced pass, ``[]`` at game end."""
        if self.is_terminal(state):
            return []
        moves = self.legal_moves(state)
        return moves if moves else [PASS]

    def branching(self, state) -> int:
        return len(self.successors(state))

    def phase(self, state) -> int:
        """A game-progress measure used for calibration buckets."""
        return 0


class ExplicitTreeGame(GameContract):
    """A game given as a nested list: leaves are numbers, interior nodes lists.

    The first player to move is +1 and turns alternate with depth. Leaf values
    are already oriented for player +1. ``static`` optionally maps a path
    (tuple of child indices) to the static value of an interior node;
    otherwise interior nodes evaluate to 0.
    """

    def __init__(self, tree, static: dict[tuple, float] | None = None):
        self.tree = tree
        self.static = static or {}

    def initial(self) -> tuple:
        return ()

    def node(self, state: tuple):
        node = self.tree
        for i in state:
            node = node[i]
        return node

    def to_move(self, state) -> int:
        return MAX_PLAYER if len(state) % 2 == 0 else MIN_PLAYER

    def legal_moves(self, state) -> list:
        node = self.node(state)
        if isinstance(node, (int, float)):
            return []
        return list(range(len(node)))

    def apply_move(self, state, move):
        node = self.node(state)
        if isinstance(node, (int, float)) or not 0 <= move < len(node):
            raise ValueError(f"illegal move {move} at {state}")
        return state + (move,)

    def is_terminal(self, state) -> bool:
        return isinstance(self.node(state), (int, float))

    def terminal_score(self, state, root_player: int) -> float:
        return root_player * float(self.node(state))

    def evaluate(self, state, root_player: int) -> float:
        node = self.node(state)
        if isinstance(node, (int, float)):
            return root_player * float(node)
        return root_player * float(self.static.get(tuple(state), 0.0))


def minimax(game: GameContract, state, depth: int, root_player: int) -> float:
    """Plain depth-limited minimax, the oracle for both searchers."""
    if game.is_terminal(state):
        return game.terminal_score(state, root_player)
    if depth == 0:
        return game.evaluate(state, root_player)
    values = [minimax(game, game.apply_move(state, m), depth - 1, root_player)
              for m in game.successors(state)]
    return max(values) if game.to_move(state) == root_player else min(values)


def minimax_move(game: GameContract, state, depth: int) -> tuple[Any, float]:
    """Best move and value by plain minimax (first move wins ties)."""
    root = game.to_move(state)
    best_move, best = None, float("-inf")
    for m in game.successors(state):
        v = minimax(game, game.apply_move(state, m), depth - 1, root)
        if v > best:
            best_move, best = m, v
    return best_move, best
