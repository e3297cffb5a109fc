"""Estimate the successor-value distribution q from best-successor statistics.

Samples are taken from the mover's side: for a position with static value
``e`` and children with static values ``c_1..c_n`` (all from the mover's
point of view) the observed statistic is ``max(c) - e``. Modelling the
children as ``e + dmu + sigma * Z_i`` makes that statistic the maximum of n
draws, whose mean and variance are ``dmu + sigma * E_n`` and
``sigma^2 * V_n`` with (E_n, V_n) the moments of the maximum of n standard
normals. Matching the first two sample moments inverts this map in closed
form, also when n varies inside a bucket.
"""
from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .dist import NormalParams, min_stat_moments
from .game import MAX_PLAYER

log = logging.getLogger(__name__)

FORMAT_HEADER = "# mgss2-calibration v1"
PHASE_BUCKETS = ((4, 20), (21, 44), (45, 64))
BRANCH_BUCKETS = ((1, 5), (6, 12), (13, 64))
GLOBAL_KEY = (4, 64, 1, 64)
MIN_COUNT = 100


@dataclass(frozen=True)
class Sample:
    """One calibration position: parent static value and its children's."""

    phase: int
    parent: float
    children: tuple


@dataclass(frozen=True)
class Bucket:
    dmu: float
    sigma: float
    count: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"bucket sigma must be > 0, got {self.sigma}")


@dataclass
class QCalibration:
    """Phase x branching buckets of (dmu, sigma), with a global fallback."""

    buckets: dict = field(default_factory=dict)
    fallback: Bucket = field(default_factory=lambda: Bucket(0.0, 1.0, 0))
    min_count: int = MIN_COUNT

    def bucket(self, phase: int, branching: int) -> Bucket:
        for (plo, phi, blo, bhi), b in self.buckets.items():
            if plo <= phase <= phi and blo <= branching <= bhi:
                if b.count >= self.min_count:
                    return b
                break
        return self.fallback

    def q_for(self, phase: int, branching: int, static: float, kind: int) -> NormalParams:
        """q for a node whose static value (root orientation) is ``static``.

        ``kind`` is MAX_PLAYER when the root player moves at the node; the
        offset is applied from the mover's side.
        """
        b = self.bucket(phase, branching)
        mean = static + b.dmu if kind == MAX_PLAYER else static - b.dmu
        return NormalParams(mean, b.sigma)

    # -- text format ---------------------------------------------------------
    def dumps(self) -> str:
        lines = [FORMAT_HEADER, f"# min_count {self.min_count}",
                 "# phase_lo phase_hi branch_lo branch_hi dmu sigma count"]
        rows = [(GLOBAL_KEY, self.fallback)] + sorted(self.buckets.items())
        for (plo, phi, blo, bhi), b in rows:
            lines.append(f"{plo} {phi} {blo} {bhi} {b.dmu:.10g} {b.sigma:.10g} {b.count}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "QCalibration":
        lines = text.splitlines()
        if not lines or lines[0].strip() != FORMAT_HEADER:
            raise ValueError("not a calibration file (missing version header)")
        min_count = MIN_COUNT
        buckets = {}
        fallback = None
        for line in lines[1:]:
            line = line.strip()
            if line.startswith("# min_count"):
                min_count = int(line.split()[2])
                continue
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 7:
                raise ValueError(f"bad calibration record: {line!r}")
            key = tuple(int(p) for p in parts[:4])
            b = Bucket(float(parts[4]), float(parts[5]), int(parts[6]))
            if key == GLOBAL_KEY:
                fallback = b
            else:
                buckets[key] = b
        if fallback is None:
            raise ValueError("calibration file lacks the global record")
        return cls(buckets, fallback, min_count)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "QCalibration":
        return cls.loads(Path(path).read_text())


def fit_bucket(stats: Iterable[tuple[float, int]]) -> Bucket:
    """Recover (dmu, sigma) from (best-child offset, branching) pairs."""
    arr = np.array(list(stats), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("no samples to fit")
    d, n = arr[:, 0], arr[:, 1].astype(int)
    # moments of the maximum of n standard normals (negated minimum)
    moments = {k: min_stat_moments(int(k)) for k in np.unique(n)}
    e = np.array([-moments[k][0] for k in n])
    v = np.array([moments[k][1] for k in n])
    var_d = float(d.var())
    if var_d <= 0.0:
        raise ValueError("degenerate samples: best-child offsets have zero variance")
    sigma = math.sqrt(var_d / (float(e.var()) + float(v.mean())))
    dmu = float(d.mean()) - sigma * float(e.mean())
    return Bucket(dmu, sigma, len(d))


def calibrate_q(samples: Iterable[Sample], min_count: int = MIN_COUNT) -> QCalibration:
    """Fit per-bucket q parameters; thin buckets defer to the global fit."""
    grouped: dict[tuple, list] = {}
    everything = []
    for smp in samples:
        n = len(smp.children)
        if n == 0:
            continue
        stat = (max(smp.children) - smp.parent, n)
        everything.append(stat)
        key = _bucket_key(smp.phase, n)
        if key is not None:
            grouped.setdefault(key, []).append(stat)
    if not everything:
        raise ValueError("no usable calibration samples")
    fallback = fit_bucket(everything)
    buckets = {}
    for key, stats in grouped.items():
        if len(stats) < min_count:
            log.info("bucket %s has %d samples (< %d); using global fit", key, len(stats), min_count)
            continue
        try:
            buckets[key] = fit_bucket(stats)
        except ValueError as exc:
            log.warning("bucket %s not fitted: %s", key, exc)
    return QCalibration(buckets, fallback, min_count)


def _bucket_key(phase: int, branching: int):
    for plo, phi in PHASE_BUCKETS:
        if plo <= phase <= phi:
            for blo, bhi in BRANCH_BUCKETS:
                if blo <= branching <= bhi:
                    return (plo, phi, blo, bhi)
    return None


def sample_position(game, state) -> Sample | None:
    """Mover-side static values of a position and all its children."""
    if game.is_terminal(state):
        return None
    moves = game.legal_moves(state)
    if not moves:
        return None
    mover = game.to_move(state)
    parent = game.evaluate(state, mover)
    children = tuple(game.evaluate(game.apply_move(state, m), mover) for m in moves)
    return Sample(game.phase(state), parent, children)


def self_play_samples(game, games: int, rng: random.Random,
                      epsilon: float = 0.3) -> list[Sample]:
    """Samples from epsilon-greedy one-ply self-play games."""
    out = []
    for _ in range(games):
        state = game.initial()
        while not game.is_terminal(state):
            smp = sample_position(game, state)
            moves = game.successors(state)
            if smp is not None:
                out.append(smp)
            if smp is None or rng.random() < epsilon:
                move = rng.choice(moves)
            else:
                best = max(smp.children)
                move = moves[smp.children.index(best)]
            state = game.apply_move(state, move)
    return out


def default_calibration() -> QCalibration:
    """The calibration shipped with the package (Othello, default evaluator)."""
    path = Path(__file__).with_name("data") / "othello_calibration.txt"
    if path.exists():
        return QCalibration.load(path)
    log.warning("shipped calibration missing; using N(0, 10) everywhere")
    return QCalibration({}, Bucket(0.0, 10.0, 0))
