"""Othello on bitboards, with a positional/mobility evaluator.

Square ``sq = 8 * row + col`` where ``a1`` is 0, ``h1`` is 7 and ``h8`` is 63.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import kernels
from .game import PASS, GameContract

BLACK = 1
WHITE = -1

WIN_SCORE = 10_000.0

# classic corner-heavy table; X-squares and C-squares penalised
DEFAULT_WEIGHTS = (
    100, -20, 10, 5, 5, 10, -20, 100,
    -20, -50, -2, -2, -2, -2, -50, -20,
    10, -2, -1, -1, -1, -1, -2, 10,
    5, -2, -1, -1, -1, -1, -2, 5,
    5, -2, -1, -1, -1, -1, -2, 5,
    10, -2, -1, -1, -1, -1, -2, 10,
    -20, -50, -2, -2, -2, -2, -50, -20,
    100, -20, 10, 5, 5, 10, -20, 100,
)


def square_name(sq: int) -> str:
    if sq == PASS:
        return "--"
    return "abcdefgh"[sq % 8] + str(sq // 8 + 1)


def parse_square(name: str) -> int:
    if name == "--":
        return PASS
    col = "abcdefgh".index(name[0].lower())
    row = int(name[1]) - 1
    if not 0 <= row < 8:
        raise ValueError(f"bad square {name!r}")
    return 8 * row + col


def format_transcript(moves) -> str:
    return "".join(square_name(m) for m in moves)


def parse_transcript(text: str) -> list[int]:
    if len(text) % 2:
        raise ValueError("transcript length must be even")
    return [parse_square(text[i:i + 2]) for i in range(0, len(text), 2)]


@dataclass(frozen=True)
class OthelloBoard:
    black: int
    white: int
    to_move: int = BLACK
    passes: int = 0

    @classmethod
    def initial(cls) -> "OthelloBoard":
        d4, e4, d5, e5 = 27, 28, 35, 36
        return cls(black=(1 << e4) | (1 << d5), white=(1 << d4) | (1 << e5))

    @property
    def mover(self) -> int:
        return self.black if self.to_move == BLACK else self.white

    @property
    def opponent(self) -> int:
        return self.white if self.to_move == BLACK else self.black

    def discs(self) -> int:
        return kernels.popcount(self.black | self.white)

    def counts(self) -> tuple[int, int]:
        return kernels.popcount(self.black), kernels.popcount(self.white)

    def swapped(self) -> "OthelloBoard":
        """Colour-swapped position (discs and side to move)."""
        return OthelloBoard(self.white, self.black, -self.to_move, self.passes)

    def cell(self, sq: int) -> int:
        if self.black >> sq & 1:
            return BLACK
        if self.white >> sq & 1:
            return WHITE
        return 0

    def __str__(self) -> str:
        rows = []
        for r in range(7, -1, -1):
            cells = "".join(".XO"[self.cell(8 * r + c)] for c in range(8))
            rows.append(f"{r + 1} {cells}")
        rows.append("  abcdefgh")
        rows.append(("X" if self.to_move == BLACK else "O") + " to move")
        return "\n".join(rows)


def legal_moves(board: OthelloBoard) -> list[int]:
    mask = kernels.legal_mask(board.mover, board.opponent)
    moves = []
    while mask:
        low = mask & -mask
        moves.append(low.bit_length() - 1)
        mask ^= low
    return moves


def is_terminal(board: OthelloBoard) -> bool:
    if board.passes >= 2 or (board.black | board.white) == 0xFFFFFFFFFFFFFFFF:
        return True
    return not kernels.legal_mask(board.mover, board.opponent) and \
        not kernels.legal_mask(board.opponent, board.mover)


def apply_move(board: OthelloBoard, move: int) -> OthelloBoard:
    """Play ``move`` (a square or PASS); raises ValueError when illegal."""
    me, opp = board.mover, board.opponent
    if move == PASS:
        if kernels.legal_mask(me, opp):
            raise ValueError("cannot pass with legal moves available")
        return OthelloBoard(board.black, board.white, -board.to_move, board.passes + 1)
    if not 0 <= move < 64 or (me | opp) >> move & 1:
        raise ValueError(f"illegal move {square_name(move) if 0 <= move < 64 else move}")
    flips = kernels.flip_mask(me, opp, move)
    if not flips:
        raise ValueError(f"illegal move {square_name(move)}: nothing flipped")
    me |= flips | (1 << move)
    opp &= ~flips
    if board.to_move == BLACK:
        return OthelloBoard(me, opp, WHITE, 0)
    return OthelloBoard(opp, me, BLACK, 0)


@dataclass(frozen=True)
class EvalModel:
    """Weights of the static evaluator, all in evaluation units.

    value = positional table + mobility_weight * (mobility difference)
            + disc ramp * (disc difference), the ramp growing from
            disc_weight at ``late_empties`` empty squares to
            disc_weight * (late_empties + 1) on a full board.
    """

    weights: tuple = DEFAULT_WEIGHTS
    mobility_weight: int = 5
    disc_weight: int = 1
    late_empties: int = 16
    _kernel: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_kernel", kernels.StaticEvaluator(
            self.weights, self.mobility_weight, self.disc_weight, self.late_empties))

    def black_value(self, board: OthelloBoard) -> int:
        return self._kernel.black(board.black, board.white)

    def value_bound(self) -> float:
        """Upper bound on |evaluate| for any position."""
        return float(sum(abs(w) for w in self.weights)
                     + abs(self.mobility_weight) * 64
                     + abs(self.disc_weight) * (self.late_empties + 1) * 64)


def evaluate(board: OthelloBoard, model: EvalModel, root_player: int = BLACK) -> float:
    """Static value, positive when good for ``root_player``."""
    return float(root_player * model.black_value(board))


def terminal_score(board: OthelloBoard, root_player: int = BLACK) -> float:
    """Exact final value: a win/loss margin beyond any static value, plus the disc margin."""
    nb, nw = board.counts()
    diff = root_player * (nb - nw)
    if diff > 0:
        return WIN_SCORE + diff
    if diff < 0:
        return -WIN_SCORE + diff
    return 0.0


def winner(board: OthelloBoard) -> int:
    nb, nw = board.counts()
    return (nb > nw) - (nb < nw)


class Othello(GameContract):
    def __init__(self, model: EvalModel | None = None):
        self.model = model or EvalModel()

    def initial(self) -> OthelloBoard:
        return OthelloBoard.initial()

    def to_move(self, state: OthelloBoard) -> int:
        return state.to_move

    def legal_moves(self, state: OthelloBoard) -> list[int]:
        if state.passes >= 2:
            return []
        return legal_moves(state)

    def apply_move(self, state: OthelloBoard, move: int) -> OthelloBoard:
        return apply_move(state, move)

    def is_terminal(self, state: OthelloBoard) -> bool:
        return is_terminal(state)

    def terminal_score(self, state: OthelloBoard, root_player: int) -> float:
        return terminal_score(state, root_player)

    def evaluate(self, state: OthelloBoard, root_player: int) -> float:
        return evaluate(state, self.model, root_player)

    def phase(self, state: OthelloBoard) -> int:
        return state.discs()


def random_opening(plies: int, rng: random.Random) -> tuple[OthelloBoard, list[int]]:
    """Position reached by ``plies`` uniformly random legal moves from the start."""
    board = OthelloBoard.initial()
    moves: list[int] = []
    for _ in range(plies):
        if is_terminal(board):
            break
        options = legal_moves(board) or [PASS]
        move = rng.choice(options)
        board = apply_move(board, move)
        moves.append(move)
    return board, moves


def random_playout(board: OthelloBoard, rng: random.Random) -> tuple[OthelloBoard, list[int]]:
    moves: list[int] = []
    while not is_terminal(board):
        move = rng.choice(legal_moves(board) or [PASS])
        board = apply_move(board, move)
        moves.append(move)
    return board, moves
