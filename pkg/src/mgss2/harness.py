"""Tournaments between searchers on Othello, calibration runs and cost sweeps."""
from __future__ import annotations

import csv
import io
import json
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import calibration as cal
from .alphabeta import AbConfig, alphabeta_search
from .game import PASS
from .othello import (BLACK, WHITE, Othello, OthelloBoard, format_transcript,
                      random_opening)
from .voc import VocParams, mgss2_search

log = logging.getLogger(__name__)

CSV_COLUMNS = ("game_id", "seed", "black_engine", "white_engine", "winner",
               "black_discs", "white_discs", "engine1_nodes", "engine2_nodes",
               "plies", "opening", "transcript", "flag")


# ---------------------------------------------------------------------------
# engines

@dataclass(frozen=True)
class AbEngine:
    depth: int = 2
    ordering: str = "static"

    @property
    def name(self) -> str:
        return f"ab[{self.depth}]"

    def choose(self, game, state, rng):
        res = alphabeta_search(game, state, AbConfig(self.depth, self.ordering))
        return res.move, res.nodes


@dataclass(frozen=True)
class MgssEngine:
    params: VocParams = field(default_factory=VocParams)
    calibration: cal.QCalibration | None = None

    @property
    def name(self) -> str:
        return f"mgss2[k={self.params.kappa:g}]"

    def choose(self, game, state, rng):
        calib = self.calibration or cal.default_calibration()
        move, stats, _ = mgss2_search(game, state, calib, self.params, rng)
        return move, stats.evaluations


def parse_engine(spec: str, calibration=None, f_mode: str = "exact"):
    """``ab:<depth>`` or ``mgss2:<kappa>`` (``mgss2`` alone uses kappa 1)."""
    kind, _, arg = spec.partition(":")
    if kind == "ab":
        return AbEngine(int(arg or 2))
    if kind == "mgss2":
        return MgssEngine(VocParams(kappa=float(arg or 1.0), f_mode=f_mode), calibration)
    raise ValueError(f"unknown engine spec {spec!r}")


# ---------------------------------------------------------------------------
# tournaments

@dataclass
class TournamentConfig:
    engine1: object
    engine2: object
    games: int = 20
    seed: int = 0
    opening_plies: int = 4
    workers: int = 1

    def __post_init__(self):
        if self.games < 2 or self.games % 2:
            raise ValueError("game count must be even and >= 2 (colours alternate)")
        if self.opening_plies < 0:
            raise ValueError("opening plies must be >= 0")


@dataclass
class GameRecord:
    game_id: int
    seed: int
    black_engine: str
    white_engine: str
    winner: str            # "black", "white" or "draw"
    black_discs: int
    white_discs: int
    engine1_nodes: int
    engine2_nodes: int
    plies: int
    opening: str = ""
    transcript: str = ""
    flag: str = ""

    @property
    def engine1_black(self) -> bool:
        return self.game_id % 2 == 0

    def points(self) -> tuple[float, float]:
        """Points for engine1 and engine2."""
        if self.winner == "draw":
            return 0.5, 0.5
        e1 = (self.winner == "black") == self.engine1_black
        return (1.0, 0.0) if e1 else (0.0, 1.0)


@dataclass
class TournamentResult:
    engine1: str
    engine2: str
    seed: int
    opening_plies: int
    games: list = field(default_factory=list)

    def totals(self) -> dict:
        p1 = p2 = 0.0
        w1 = w2 = d = n1 = n2 = 0
        for g in self.games:
            a, b = g.points()
            p1, p2 = p1 + a, p2 + b
            w1 += a == 1.0
            w2 += b == 1.0
            d += a == 0.5
            n1 += g.engine1_nodes
            n2 += g.engine2_nodes
        return dict(engine1_points=p1, engine2_points=p2, engine1_wins=w1,
                    engine2_wins=w2, draws=d, engine1_nodes=n1, engine2_nodes=n2)

    def score(self) -> float:
        """Engine1's share of the points."""
        return self.totals()["engine1_points"] / max(len(self.games), 1)


def _label_engines(e1, e2) -> tuple[str, str]:
    if e1.name == e2.name:
        return e1.name + "#1", e2.name + "#2"
    return e1.name, e2.name


def game_seed(seed: int, game_id: int) -> int:
    return random.Random(f"{seed}:game:{game_id}").getrandbits(32)


def opening_for(seed: int, pair: int, plies: int) -> tuple[OthelloBoard, list]:
    return random_opening(plies, random.Random(f"{seed}:opening:{pair}"))


def play_game(engine1, engine2, game_id: int, seed: int, opening_plies: int,
              names: tuple[str, str] | None = None, verbose=None) -> GameRecord:
    """One game; engine1 has black in even-numbered games."""
    game = Othello()
    n1, n2 = names or _label_engines(engine1, engine2)
    board, opening = opening_for(seed, game_id // 2, opening_plies)
    gseed = game_seed(seed, game_id)
    rng = random.Random(gseed)
    e1_black = game_id % 2 == 0
    players = {BLACK: engine1, WHITE: engine2} if e1_black else {BLACK: engine2, WHITE: engine1}
    count = [0, 0]
    moves: list[int] = []
    flag = ""
    forfeit = 0
    while not game.is_terminal(board):
        options = game.successors(board)
        mover = board.to_move
        engine = players[mover]
        if options == [PASS]:
            move, used = PASS, 0
        else:
            move, used = engine.choose(game, board, rng)
        slot = 0 if (mover == BLACK) == e1_black else 1
        count[slot] += used
        if move not in options:
            flag = f"illegal move {move!r} by {'black' if mover == BLACK else 'white'}"
            log.error("game %d: %s", game_id, flag)
            forfeit = mover
            break
        board = game.apply_move(board, move)
        moves.append(move)
        if verbose is not None:
            verbose(board, move, used)
    nb, nw = board.counts()
    if forfeit:
        winner = "white" if forfeit == BLACK else "black"
    else:
        winner = "black" if nb > nw else "white" if nw > nb else "draw"
    return GameRecord(game_id, gseed, n1 if e1_black else n2, n2 if e1_black else n1,
                      winner, nb, nw, count[0], count[1], len(moves),
                      format_transcript(opening), format_transcript(moves), flag)


def _play_star(args):
    return play_game(*args)


def run_tournament(config: TournamentConfig) -> TournamentResult:
    """Paired-opening tournament; deterministic given the config and seed."""
    names = _label_engines(config.engine1, config.engine2)
    jobs = [(config.engine1, config.engine2, i, config.seed, config.opening_plies, names)
            for i in range(config.games)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            games = list(pool.map(_play_star, jobs))
    else:
        games = [_play_star(j) for j in jobs]
    games.sort(key=lambda g: g.game_id)
    return TournamentResult(names[0], names[1], config.seed, config.opening_plies, games)


# ---------------------------------------------------------------------------
# reports

def aggregate_block(result: TournamentResult) -> str:
    t = result.totals()
    rows = [("algorithm", "points", "wins", "nodes"),
            (result.engine1, f"{t['engine1_points']:g}", str(t["engine1_wins"]), str(t["engine1_nodes"])),
            (result.engine2, f"{t['engine2_points']:g}", str(t["engine2_wins"]), str(t["engine2_nodes"]))]
    width = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, width)).rstrip() for r in rows]
    lines.append(f"games {len(result.games)}, draws {t['draws']}")
    return "\n".join(lines)


def dumps_report(result: TournamentResult, fmt: str = "csv") -> str:
    meta = dict(engine1=result.engine1, engine2=result.engine2, seed=result.seed,
                opening_plies=result.opening_plies)
    if fmt == "records":
        out = [json.dumps(dict(type="meta", **meta), sort_keys=True)]
        out += [json.dumps(dict(type="game", **asdict(g)), sort_keys=True) for g in result.games]
        out.append(json.dumps(dict(type="aggregate", **result.totals()), sort_keys=True))
        return "\n".join(out) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {v}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for g in result.games:
        writer.writerow([getattr(g, c) for c in CSV_COLUMNS])
    buf.write("\n")
    for line in aggregate_block(result).splitlines():
        buf.write(f"# {line}\n")
    return buf.getvalue()


def emit_report(result: TournamentResult, path, fmt: str = "csv") -> Path:
    path = Path(path)
    path.write_text(dumps_report(result, fmt))
    return path


def loads_report(text: str) -> TournamentResult:
    """Inverse of :func:`dumps_report` for either format."""
    if text.startswith("{"):
        meta, games = None, []
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            kind = rec.pop("type")
            if kind == "meta":
                meta = rec
            elif kind == "game":
                games.append(GameRecord(**rec))
        if meta is None:
            raise ValueError("records report lacks a meta line")
        return TournamentResult(meta["engine1"], meta["engine2"], int(meta["seed"]),
                                int(meta["opening_plies"]), games)
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# ") and ": " in line and not body:
            k, _, v = line[2:].partition(": ")
            meta[k] = v
        elif line and not line.startswith("#"):
            body.append(line)
    types = {f.name: f.type for f in fields(GameRecord)}
    games = []
    for row in csv.DictReader(body):
        games.append(GameRecord(**{k: int(v) if types[k] == "int" else v for k, v in row.items()}))
    return TournamentResult(meta["engine1"], meta["engine2"], int(meta["seed"]),
                            int(meta["opening_plies"]), games)


def load_report(path) -> TournamentResult:
    return loads_report(Path(path).read_text())


# ---------------------------------------------------------------------------
# calibration and cost sweeps

def run_calibration(games: int = 200, seed: int = 0, out=None,
                    min_count: int = cal.MIN_COUNT, epsilon: float = 0.3) -> cal.QCalibration:
    """Self-play sampling, bucket fitting, and optionally writing the file."""
    samples = cal.self_play_samples(Othello(), games, random.Random(seed), epsilon)
    fitted = cal.calibrate_q(samples, min_count)
    if not fitted.buckets:
        log.warning("too few samples for any bucket (%d); only the global record is written",
                    len(samples))
    if out is not None:
        fitted.save(out)
    return fitted


@dataclass
class SweepRow:
    kappa: float
    score: float
    mgss2_nodes: int
    ab_nodes: int
    games: int

    @property
    def nodes_per_game(self) -> float:
        return self.mgss2_nodes / max(self.games, 1)

    @property
    def node_ratio(self) -> float:
        return self.mgss2_nodes / max(self.ab_nodes, 1)


def sweep_cost(kappas, games: int = 4, seed: int = 0, ab_depth: int = 2,
               calibration=None, opening_plies: int = 4, f_mode: str = "exact",
               workers: int = 1) -> list[SweepRow]:
    """Mini-tournaments of MGSS2 against alpha-beta over a grid of kappa values."""
    calibration = calibration or cal.default_calibration()
    rows = []
    for k in kappas:
        mg = MgssEngine(VocParams(kappa=k, f_mode=f_mode), calibration)
        res = run_tournament(TournamentConfig(mg, AbEngine(ab_depth), games, seed,
                                              opening_plies, workers))
        t = res.totals()
        rows.append(SweepRow(k, res.score(), t["engine1_nodes"], t["engine2_nodes"], games))
        log.info("kappa %g: score %.3f, nodes %d vs %d", k, rows[-1].score,
                 rows[-1].mgss2_nodes, rows[-1].ab_nodes)
    return rows


def format_sweep(rows) -> str:
    lines = ["kappa,score,mgss2_nodes,ab_nodes,node_ratio,nodes_per_game"]
    for r in rows:
        lines.append(f"{r.kappa:g},{r.score:.4f},{r.mgss2_nodes},{r.ab_nodes},"
                     f"{r.node_ratio:.4f},{r.nodes_per_game:.1f}")
    return "\n".join(lines) + "\n"
