"""Decision-theoretic game-tree search with single-successor expansions.

The compiled kernels in ``mgss2._speedups`` are used when available;
``mgss2.kernels.BACKEND`` says which implementation was loaded.
"""
from .alphabeta import AbConfig, alphabeta_search
from .calibration import QCalibration, calibrate_q, default_calibration
from .dist import BackupTable, NormalParams, backup_max, backup_min, default_table
from .game import ExplicitTreeGame, GameContract, minimax, minimax_move
from .kernels import BACKEND
from .othello import EvalModel, Othello, OthelloBoard
from .tree import SearchNode, SearchTree
from .voc import VocParams, expected_benefit, mgss2_search

__version__ = "0.1.0"

__all__ = [
    "AbConfig", "alphabeta_search", "QCalibration", "calibrate_q", "default_calibration",
    "BackupTable", "NormalParams", "backup_max", "backup_min", "default_table",
    "ExplicitTreeGame", "GameContract", "minimax", "minimax_move", "BACKEND",
    "EvalModel", "Othello", "OthelloBoard", "SearchNode", "SearchTree",
    "VocParams", "expected_benefit", "mgss2_search",
]
