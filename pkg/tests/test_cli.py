import subprocess
import sys

from cellmatch.cli import main
from cellmatch.harness import read_csv


def test_run_and_gain(tmp_path, capsys):
    cfg = tmp_path / "small.cfg"
    cfg.write_text("num_users = 10\nnum_picocells = 3\n")
    out = tmp_path / "runs.csv"
    assert main(["run", "--config", str(cfg), "--picos", "3,5", "--runs", "2", "--seed", "7",
                 "--out", str(out)]) == 0
    recs = read_csv(out)
    assert len(recs) == 2 * 2 * 2 and {r.seed for r in recs} == {7, 8}
    assert main(["gain", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "grid,metric,matching,max_sinr,gain" and len(lines) == 1 + 2 * 3


def test_load_sign_flag(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    common = ["run", "--users", "20", "--picos", "6", "--runs", "2"]
    assert main(common + ["--out", str(a)]) == 0
    assert main(common + ["--literal-load", "--out", str(b)]) == 0
    assert a.read_text() != b.read_text()


def test_failing_grid_point_exit_code(capsys):
    assert main(["run", "--users", "5,-1", "--runs", "1", "--out", "-"]) == 2
    assert "num_users=-1" in capsys.readouterr().err


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("quota = 0\n")
    assert main(["run", "--config", str(cfg), "--runs", "1"]) == 1
    assert "quota" in capsys.readouterr().err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "cellmatch", "run", "--users", "4", "--picos", "2", "--runs", "1",
                          "--algorithms", "max_sinr"], capture_output=True, text=True, check=True)
    assert len(res.stdout.splitlines()) == 2
