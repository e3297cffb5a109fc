import random

import numpy as np
import pytest

from mgss2 import calibration as cal
from mgss2.calibration import (Bucket, QCalibration, Sample, calibrate_q, fit_bucket,
                               min_stat_moments)
from mgss2.game import MAX_PLAYER, MIN_PLAYER
from mgss2.harness import run_calibration


def synthetic(n_samples, dmu, sigma, branching, seed, phase=30, offset=0.0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_samples):
        n = branching if isinstance(branching, int) else int(rng.integers(branching[0], branching[1] + 1))
        parent = float(rng.normal(0, 20))
        kids = parent + dmu + sigma * rng.standard_normal(n) + offset
        out.append(Sample(phase, parent, tuple(kids)))
    return out


def test_recovers_standard_q():
    fitted = calibrate_q(synthetic(100_000, 0.0, 1.0, 10, 1))
    b = fitted.fallback
    assert -0.05 <= b.dmu <= 0.05
    assert 0.95 <= b.sigma <= 1.05


def test_recovers_mixed_branching():
    fitted = calibrate_q(synthetic(100_000, -3.0, 7.0, (1, 12), 2))
    b = fitted.bucket(30, 8)
    assert b.dmu == pytest.approx(-3.0, abs=0.05 * 7.0)
    assert b.sigma == pytest.approx(7.0, rel=0.05)


def test_single_successor_stats_are_q():
    samples = synthetic(20_000, 1.5, 2.0, 1, 3)
    d = np.array([s.children[0] - s.parent for s in samples])
    b = fit_bucket((x, 1) for x in d)
    assert b.dmu == pytest.approx(d.mean(), abs=1e-9)
    assert b.sigma == pytest.approx(d.std(), rel=1e-9)


def test_offset_shifts_mean_only():
    a = calibrate_q(synthetic(30_000, 0.0, 1.0, 6, 4)).fallback
    b = calibrate_q(synthetic(30_000, 0.0, 1.0, 6, 4, offset=2.5)).fallback
    assert b.dmu - a.dmu == pytest.approx(2.5, abs=1e-9)
    assert b.sigma == pytest.approx(a.sigma, rel=1e-9)


def test_forward_simulation_reproduces_best_child_mean():
    samples = synthetic(20_000, -1.0, 3.0, (2, 9), 5)
    fitted = calibrate_q(samples)
    observed = np.array([max(s.children) - s.parent for s in samples])
    ns = [len(s.children) for s in samples]
    b = fitted.bucket(30, 6)
    predicted = np.mean([b.dmu - b.sigma * min_stat_moments(n)[0] for n in ns])
    se = observed.std() / np.sqrt(len(observed))
    assert abs(predicted - observed.mean()) <= 2 * se


def test_thin_buckets_fall_back():
    samples = synthetic(50, 0.0, 1.0, 3, 6, phase=10) + synthetic(500, 0.0, 1.0, 8, 7, phase=30)
    fitted = calibrate_q(samples, min_count=100)
    assert (4, 20, 1, 5) not in fitted.buckets
    assert fitted.bucket(10, 3) is fitted.fallback
    assert fitted.bucket(30, 8) is fitted.buckets[(21, 44, 6, 12)]


def test_degenerate_bucket_rejected():
    with pytest.raises(ValueError):
        fit_bucket([(1.0, 3)] * 10)
    with pytest.raises(ValueError):
        Bucket(0.0, 0.0, 5)


def test_q_orientation():
    c = QCalibration({}, Bucket(2.0, 3.0, 1000))
    assert c.q_for(30, 5, 10.0, MAX_PLAYER).mean == 12.0
    assert c.q_for(30, 5, 10.0, MIN_PLAYER).mean == 8.0


def test_text_roundtrip(tmp_path):
    fitted = calibrate_q(synthetic(3000, -1.0, 2.0, (1, 15), 8))
    path = tmp_path / "c.txt"
    fitted.save(path)
    back = QCalibration.load(path)
    assert back.min_count == fitted.min_count
    assert back.fallback.count == fitted.fallback.count
    assert back.fallback.sigma == pytest.approx(fitted.fallback.sigma, rel=1e-9)
    assert set(back.buckets) == set(fitted.buckets)
    assert path.read_text().startswith(cal.FORMAT_HEADER)


def test_load_rejects_garbage():
    with pytest.raises(ValueError):
        QCalibration.loads("hello\n")
    with pytest.raises(ValueError):
        QCalibration.loads(cal.FORMAT_HEADER + "\n4 20 1 5 0 1 10\n")


def test_self_play_calibration(tmp_path):
    a = run_calibration(200, seed=3, out=tmp_path / "a.txt")
    run_calibration(200, seed=3, out=tmp_path / "b.txt")
    assert (tmp_path / "a.txt").read_text() == (tmp_path / "b.txt").read_text()
    for lo, hi in cal.PHASE_BUCKETS:
        assert any(k[0] == lo and v.count >= a.min_count for k, v in a.buckets.items())
    assert all(v.sigma > 0 for v in a.buckets.values())


def test_shipped_calibration_loads():
    c = cal.default_calibration()
    assert c.fallback.count > 0 and c.buckets


def test_sample_position_orientation():
    from mgss2.othello import Othello
    game = Othello()
    rng = random.Random(1)
    state = game.initial()
    for _ in range(7):
        state = game.apply_move(state, rng.choice(game.legal_moves(state)))
    smp = cal.sample_position(game, state)
    mover = game.to_move(state)
    assert smp.parent == game.evaluate(state, mover)
    assert len(smp.children) == len(game.legal_moves(state))
