import pytest

from mgss2 import harness
from mgss2.harness import (AbEngine, MgssEngine, TournamentConfig, aggregate_block,
                           dumps_report, loads_report, parse_engine, run_tournament,
                           sweep_cost)
from mgss2.othello import BLACK, OthelloBoard, parse_transcript, random_opening
from mgss2.voc import VocParams


@pytest.fixture(scope="module")
def small_result():
    cfg = TournamentConfig(MgssEngine(VocParams(kappa=1.0)), AbEngine(1), games=2, seed=3)
    return run_tournament(cfg)


def test_smoke_totals_consistent(small_result):
    t = small_result.totals()
    assert len(small_result.games) == 2
    assert t["engine1_points"] + t["engine2_points"] == 2
    assert t["engine1_nodes"] == sum(g.engine1_nodes for g in small_result.games)
    assert t["engine2_nodes"] == sum(g.engine2_nodes for g in small_result.games)


def test_colours_alternate(small_result):
    g0, g1 = small_result.games
    assert g0.black_engine == small_result.engine1 == g1.white_engine
    assert g0.opening == g1.opening


def test_games_replay_legally(small_result):
    from mgss2.othello import apply_move
    for g in small_result.games:
        board = OthelloBoard.initial()
        for m in parse_transcript(g.opening) + parse_transcript(g.transcript):
            board = apply_move(board, m)
        assert board.counts() == (g.black_discs, g.white_discs)
        assert not g.flag


@pytest.mark.parametrize("fmt", ["csv", "records"])
def test_report_roundtrip(small_result, fmt, tmp_path):
    path = harness.emit_report(small_result, tmp_path / f"r.{fmt}", fmt)
    back = harness.load_report(path)
    assert back == small_result
    assert loads_report(dumps_report(small_result, fmt)) == small_result


def test_aggregate_block_shape(small_result):
    text = dumps_report(small_result, "csv")
    block = aggregate_block(small_result)
    assert block.splitlines()[0].split() == ["algorithm", "points", "wins", "nodes"]
    assert small_result.engine1 in block and small_result.engine2 in block
    for line in block.splitlines():
        assert f"# {line}" in text


def test_unwritable_path(small_result, tmp_path):
    with pytest.raises(OSError):
        harness.emit_report(small_result, tmp_path / "missing" / "dir" / "r.csv")


def test_unknown_format(small_result):
    with pytest.raises(ValueError):
        dumps_report(small_result, "xml")


def test_deterministic_reports():
    cfg = TournamentConfig(MgssEngine(VocParams(kappa=1.0)), AbEngine(1), games=2, seed=9)
    a = dumps_report(run_tournament(cfg), "records")
    b = dumps_report(run_tournament(cfg), "records")
    assert a == b


def test_self_play_is_even():
    e = AbEngine(1)
    res = run_tournament(TournamentConfig(e, e, games=4, seed=2))
    assert res.score() == 0.5
    assert res.engine1 != res.engine2


class IllegalEngine:
    name = "broken"

    def choose(self, game, state, rng):
        return 0, 0   # a1 is never legal early in the game


def test_illegal_move_forfeits():
    rec = harness.play_game(IllegalEngine(), AbEngine(1), 0, seed=1, opening_plies=4)
    assert rec.flag and rec.winner == "white"
    assert rec.points() == (0.0, 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        TournamentConfig(AbEngine(1), AbEngine(2), games=3)


def test_parse_engine():
    assert parse_engine("ab:3") == AbEngine(3)
    assert parse_engine("mgss2:0.5").params.kappa == 0.5
    with pytest.raises(ValueError):
        parse_engine("mcts")


def test_opening_pairs_and_seeds():
    a, _ = harness.opening_for(1, 0, 4)
    b, _ = harness.opening_for(1, 0, 4)
    assert a == b and a.discs() == 8 and a.to_move == BLACK
    assert harness.game_seed(1, 0) != harness.game_seed(1, 1)
    assert random_opening(0, None)[0] == OthelloBoard.initial()


def test_sweep_rows():
    rows = sweep_cost([1e6, 1.0], games=2, seed=1, ab_depth=1)
    assert [r.kappa for r in rows] == [1e6, 1.0]
    huge, small = rows
    assert huge.nodes_per_game <= small.nodes_per_game
    text = harness.format_sweep(rows)
    assert text.splitlines()[0].startswith("kappa,score")
