import pytest

from mgss2.calibration import QCalibration
from mgss2.cli import build_parser, main
from mgss2.harness import load_report


def test_tournament_writes_report(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["tournament", "--games", "2", "--seed", "1", "--ab-depth", "1",
                 "--kappa", "1", "--out", str(out)]) == 0
    res = load_report(out)
    assert len(res.games) == 2
    assert "algorithm" in capsys.readouterr().err


def test_tournament_records_to_stdout(capsys):
    main(["tournament", "--games", "2", "--engine1", "ab:1", "--engine2", "ab:1",
          "--format", "records"])
    assert capsys.readouterr().out.startswith("{")


def test_calibrate(tmp_path, capsys):
    out = tmp_path / "c.txt"
    main(["calibrate", "--games", "20", "--seed", "2", "--out", str(out), "--min-count", "50"])
    assert QCalibration.load(out).fallback.count > 0


def test_sweep(tmp_path, capsys):
    out = tmp_path / "s.csv"
    main(["sweep-cost", "--kappas", "100,1", "--games", "2", "--ab-depth", "1",
          "--out", str(out)])
    lines = out.read_text().splitlines()
    assert len(lines) == 3


def test_play(capsys):
    main(["play", "--engine1", "ab:1", "--engine2", "mgss2:2", "--seed", "4"])
    out = capsys.readouterr().out
    assert "(black)" in out


def test_voc_trace(capsys):
    main(["voc-trace", "--moves", "f5d6c3d3c4", "--kappa", "0.5", "--dump-tree",
          "--f-mode", "single-stage"])
    out = capsys.readouterr().out
    assert "step 0" in out and "move" in out


def test_requires_subcommand():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
