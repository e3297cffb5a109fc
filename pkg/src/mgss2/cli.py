"""Command line: tournaments, calibration, cost sweeps, single games and VOC traces."""
from __future__ import annotations

import argparse
import logging
import random
import sys

from . import calibration as cal
from . import harness
from .othello import (Othello, OthelloBoard, parse_transcript, random_opening,
                      square_name)
from .voc import VocParams, mgss2_search


def _calibration(args):
    return cal.QCalibration.load(args.calibration) if args.calibration else cal.default_calibration()


def _engines(args, calib):
    e1 = harness.parse_engine(args.engine1 or f"mgss2:{args.kappa}", calib, args.f_mode)
    e2 = harness.parse_engine(args.engine2 or f"ab:{args.ab_depth}", calib, args.f_mode)
    return e1, e2


def cmd_tournament(args) -> int:
    calib = _calibration(args)
    e1, e2 = _engines(args, calib)
    result = harness.run_tournament(harness.TournamentConfig(
        e1, e2, args.games, args.seed, args.opening_plies, args.workers))
    text = harness.dumps_report(result, args.format)
    if args.out:
        harness.emit_report(result, args.out, args.format)
    else:
        sys.stdout.write(text)
    print(harness.aggregate_block(result), file=sys.stderr)
    return 0


def cmd_calibrate(args) -> int:
    out = args.out or "othello_calibration.txt"
    fitted = harness.run_calibration(args.games, args.seed, out, args.min_count)
    sys.stdout.write(fitted.dumps())
    return 0


def cmd_sweep(args) -> int:
    kappas = [float(k) for k in args.kappas.split(",")]
    rows = harness.sweep_cost(kappas, args.games, args.seed, args.ab_depth, _calibration(args),
                              args.opening_plies, args.f_mode, args.workers)
    text = harness.format_sweep(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def cmd_play(args) -> int:
    calib = _calibration(args)
    e1, e2 = _engines(args, calib)

    def show(board, move, used):
        print(f"{square_name(move)} ({used} nodes)")
        print(board)
        print()

    rec = harness.play_game(e1, e2, args.game_id, args.seed, args.opening_plies, verbose=show)
    print(f"{rec.black_engine} (black) {rec.black_discs} - {rec.white_discs} "
          f"{rec.white_engine} (white): {rec.winner}")
    if rec.flag:
        print("flag:", rec.flag)
    return 0


def _position(args) -> OthelloBoard:
    game = Othello()
    if args.moves:
        board = game.initial()
        for m in parse_transcript(args.moves):
            board = game.apply_move(board, m)
        return board
    return random_opening(args.opening_plies, random.Random(args.seed))[0]


def cmd_voc_trace(args) -> int:
    board = _position(args)
    print(board)
    trace: list = []
    params = VocParams(kappa=args.kappa, f_mode=args.f_mode)
    move, stats, tree = mgss2_search(Othello(), board, _calibration(args), params,
                                     random.Random(args.seed), trace=trace)
    for step, cands in enumerate(trace):
        print(f"step {step}: {len(cands)} candidate(s) scored")
        for mv, depth, case, benefit, net in cands:
            print(f"  {square_name(mv) if mv is not None else '?'} depth={depth} "
                  f"case={case} benefit={benefit:.5g} net={net:.5g}")
    print("move", square_name(move), stats.as_dict())
    if args.dump_tree and tree is not None:
        print(tree.dump(fmt=lambda m: square_name(m) if m is not None else "?"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mgss2", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, games=20):
        sp.add_argument("--games", type=int, default=games)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--ab-depth", type=int, default=2)
        sp.add_argument("--kappa", type=float, default=0.3)
        sp.add_argument("--calibration", help="calibration file (default: shipped Othello fit)")
        sp.add_argument("--opening-plies", type=int, default=4)
        sp.add_argument("--out")
        sp.add_argument("--f-mode", choices=("exact", "single-stage"), default="exact")
        sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("tournament", help="paired-opening match between two engines")
    common(sp)
    sp.add_argument("--engine1", help="engine spec, e.g. mgss2:0.3 (default from --kappa)")
    sp.add_argument("--engine2", help="engine spec, e.g. ab:2 (default from --ab-depth)")
    sp.add_argument("--format", choices=("csv", "records"), default="csv")
    sp.set_defaults(func=cmd_tournament)

    sp = sub.add_parser("calibrate", help="fit q from self-play and write a calibration file")
    common(sp, games=200)
    sp.add_argument("--min-count", type=int, default=cal.MIN_COUNT)
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("sweep-cost", help="mini-tournaments over a grid of kappa values")
    common(sp, games=4)
    sp.add_argument("--kappas", default="3,1,0.5,0.3,0.2,0.1")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("play", help="one verbose game")
    common(sp)
    sp.add_argument("--engine1")
    sp.add_argument("--engine2")
    sp.add_argument("--game-id", type=int, default=0)
    sp.set_defaults(func=cmd_play)

    sp = sub.add_parser("voc-trace", help="candidate scores for one move decision")
    common(sp)
    sp.add_argument("--moves", help="transcript from the start position, e.g. f5d6c3")
    sp.add_argument("--dump-tree", action="store_true")
    sp.set_defaults(func=cmd_voc_trace)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
