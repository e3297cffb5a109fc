"""The compiled kernels and the pure-Python fallback must agree."""
import math
import random

import pytest

from mgss2 import _fallback, kernels
from mgss2.othello import DEFAULT_WEIGHTS, OthelloBoard, apply_move, legal_moves, random_opening

speedups = pytest.importorskip("mgss2._speedups")


def pair(table):
    args = (table.zmin, table.step, table.values, table.slopes, table.saturation)
    return _fallback.BackupKernel(*args), speedups.BackupKernel(*args)


def random_boards(n, seed):
    rng = random.Random(seed)
    for _ in range(n):
        board, _ = random_opening(rng.randint(0, 55), rng)
        yield board


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_bitboard_parity():
    for board in random_boards(400, 1):
        me, opp = board.mover, board.opponent
        assert speedups.legal_mask(me, opp) == _fallback.legal_mask(me, opp)
        assert speedups.popcount(me | opp) == _fallback.popcount(me | opp) == bin(me | opp).count("1")
        for sq in range(64):
            if not (me | opp) >> sq & 1:
                assert speedups.flip_mask(me, opp, sq) == _fallback.flip_mask(me, opp, sq)


def test_evaluator_parity():
    a = _fallback.StaticEvaluator(DEFAULT_WEIGHTS, 5, 1, 16)
    b = speedups.StaticEvaluator(DEFAULT_WEIGHTS, 5, 1, 16)
    for board in random_boards(400, 2):
        assert a.black(board.black, board.white) == b.black(board.black, board.white)


def test_backup_parity(table):
    py, cy = pair(table)
    rng = random.Random(3)
    for _ in range(2000):
        l = rng.randint(0, 64)
        mu, sigma = rng.gauss(0, 5), rng.choice([0.0, rng.uniform(0.01, 20)])
        m = rng.choice([math.inf, -math.inf, rng.gauss(mu, 3 * max(sigma, 1))])
        assert cy.bmin(l, mu, sigma, m) == py.bmin(l, mu, sigma, m)
        assert cy.bmax(l, mu, sigma, m) == py.bmax(l, mu, sigma, m)


def _random_stages(rng, depth):
    stages = []
    for _ in range(depth):
        kind = rng.choice([-1, 1])
        bound = rng.choice([math.inf if kind == -1 else -math.inf, rng.gauss(0, 1)])
        stages += [kind, rng.randint(0, 5), rng.gauss(0, 1), rng.uniform(0.2, 2), bound]
    return stages


def test_compose_and_benefit_parity(table):
    py, cy = pair(table)
    rng = random.Random(4)
    for _ in range(300):
        stages = _random_stages(rng, rng.randint(0, 3))
        x = rng.gauss(0, 2)
        assert cy.compose(stages, x) == pytest.approx(py.compose(stages, x), abs=1e-13)
        kind, l = rng.choice([-1, 1]), rng.randint(1, 6)
        s = rng.randint(1, l)
        mu, sigma = rng.gauss(0, 1), rng.uniform(0.2, 2)
        anchor = rng.choice([math.inf * -kind, rng.gauss(mu, 1)])
        thr = rng.gauss(0, 1)
        for crit, lo, hi in ((-2, -math.inf, math.inf), (0, -1.0, 1.0)):
            if crit == 0 and not stages:
                continue
            a = py.benefit(kind, l, s, mu, sigma, anchor, stages, thr, crit, lo, hi)
            b = cy.benefit(kind, l, s, mu, sigma, anchor, stages, thr, crit, lo, hi)
            assert b == pytest.approx(a, abs=1e-10, rel=1e-8)
            assert a >= 0.0


def test_pure_fallback_selected_by_env(monkeypatch):
    import importlib
    monkeypatch.setenv("MGSS2_PURE", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
        assert mod.BackupKernel is _fallback.BackupKernel
    finally:
        monkeypatch.delenv("MGSS2_PURE")
        importlib.reload(kernels)


def test_move_application_uses_kernels():
    b = OthelloBoard.initial()
    nxt = apply_move(b, legal_moves(b)[0])
    assert nxt.discs() == 5
    assert nxt.counts() == (4, 1)
