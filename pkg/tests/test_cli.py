import os

import pytest

from conelab.cli import _parse_delta, _parse_deltas, main
from conelab.geometry import load_geometry


def test_parse_delta_syntaxes():
    assert _parse_delta("2^-3") == 0.125
    assert _parse_delta("2**-3") == 0.125
    assert _parse_delta("0.25") == 0.25
    assert _parse_deltas("2^-3, 2^-4 0.03125") == (0.125, 0.0625, 0.03125)


def test_no_command_prints_help(capsys):
    assert main([]) == 2
    assert "verify" in capsys.readouterr().out


def test_accept_single_criterion(capsys):
    rc = main(["accept", "--only", "1"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "[PASS] criterion 1" in out
    assert "1/1 criteria passed" in out


def test_extremize_writes_geometry(tmp_path, capsys):
    rc = main(["extremize", "--kind", "bochner_riesz", "--n", "2",
               "--p", "6", "--delta", "2^-5", "--out", str(tmp_path)])
    assert rc == 0
    files = sorted(os.listdir(tmp_path))
    assert any(f.endswith("_tubes.txt") for f in files)
    assert any(f.endswith("_dilated.txt") for f in files)
    tubes = load_geometry(tmp_path / [f for f in files
                                      if f.endswith("_tubes.txt")][0])
    assert len(tubes) > 0


def test_sweep_flags_and_report_roundtrip(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["sweep", "--experiment", "maximal_sweep",
               "--delta", "2^-3 2^-4", "--seeds", "2", "--out", str(out)])
    assert rc == 0
    csv_path = out / "sweep.csv"
    assert csv_path.exists()
    capsys.readouterr()

    rep = tmp_path / "rep"
    rc = main(["report", "--csv", str(csv_path), "--out", str(rep)])
    assert rc == 0
    assert (rep / "report.csv").exists()
    assert any(f.endswith(".svg") for f in os.listdir(rep))


def test_sweep_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(
        "[global]\n"
        "seeds = 2\n"
        "[maximal_sweep]\n"
        "experiment = maximal_sweep\n"
        "deltas = 2^-3 2^-4\n"
        f"out_dir = {tmp_path / 'a'}\n")
    rc = main(["sweep", "--config", str(cfg),
               "--experiment", "maximal_sweep", "--out", str(tmp_path / "b")])
    assert rc == 0
    # the --out flag overrides the file's out_dir
    assert (tmp_path / "b" / "sweep.csv").exists()
    assert not (tmp_path / "a").exists()


def test_sweep_requires_experiment(tmp_path):
    with pytest.raises(SystemExit):
        main(["sweep", "--delta", "2^-3 2^-4"])


def test_missing_config_file_errors():
    with pytest.raises(FileNotFoundError):
        main(["sweep", "--config", "/nonexistent.ini",
              "--experiment", "maximal_sweep"])
