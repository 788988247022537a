import csv
import io
import json
import logging
import subprocess
import sys

import pytest

from rikit.cli import _parse_tmin, main, parse_fn
from rikit.gridfn import GridFunction, make_grid

FAST = ["--K", "4", "--t-min", "2^-20"]


def _config(caplog):
    msg = [r.getMessage() for r in caplog.records if r.getMessage().startswith("config")][-1]
    return json.loads(msg.split("config", 1)[1])


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_norm(capsys, caplog):
    caplog.set_level(logging.INFO, logger="rikit")
    code, out, err = run(capsys, "eval-norm", "--family", "lorentz:2,1", "--fn", "indicator:0.25")
    assert code == 0
    assert float(out) == pytest.approx(1.0, rel=1e-12)
    # resolved configuration goes to stderr as JSON
    assert _config(caplog)["grid"]["K"] == 16


def test_optimal_target(capsys):
    code, out, _ = run(capsys, "optimal-target", "--base", "lorentz:4/3,1", "--profile", "power:0.75", "--m", "2", *FAST)
    assert code == 0
    assert out.splitlines()[0] == "L^{4,1} [power-lorentz/subcritical]"
    assert out.splitlines()[1].endswith("pass")


def test_optimal_target_gauss(capsys):
    code, out, _ = run(capsys, "optimal-target", "--base", "orlicz:exp,2", "--profile", "gauss", "--m", "1", *FAST)
    assert code == 0
    assert out.startswith("exp L^1 ")


def test_eval_op_round_trip(capsys, tmp_path):
    path = tmp_path / "out.json"
    code, _, _ = run(capsys, "eval-op", "--op", "H", "--profile", "linear", "--m", "1", "--fn", "constant:1",
                     "--out", str(path), *FAST)
    assert code == 0
    g = GridFunction.from_json(path.read_text())
    assert g.grid == make_grid(K=4, t_min=2.0 ** -20)
    # int_0^1 log(1/t) dt = 1
    assert g.integral() == pytest.approx(1.0, rel=1e-10)
    code, out, _ = run(capsys, "eval-norm", "--family", "lebesgue:1", "--fn", str(path))
    assert float(out) == pytest.approx(1.0, rel=1e-10)


def test_suite_list(capsys):
    code, out, _ = run(capsys, "suite", "--list")
    assert code == 0
    assert "four-way-equivalence" in out.split()


def test_check_writes_jsonl(capsys, tmp_path):
    path = tmp_path / "r.jsonl"
    code, _, _ = run(capsys, "check", "linf-criterion", "--out", str(path), *FAST)
    assert code == 0
    rows = [json.loads(line) for line in path.read_text().splitlines()]
    assert len(rows) == 9 and all(r["verdict"] == "pass" for r in rows)


def test_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--base", "lebesgue:{p}", "--profile", "power:0.5", "--m", "1",
                       "--param", "p=1,4", *FAST)
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["p", "target", "value", "band_lo", "band_hi", "drift", "verdict"]
    assert len(rows) == 3
    assert rows[1][:2] == ["1", "L^{2,1} [power-lorentz/subcritical]"]
    assert rows[2][1] == "L^{inf} [power-lorentz/bounded]"
    assert code == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["eval-norm", "--family", "nope:1", "--fn", "indicator:0.5"],
        ["eval-norm", "--family", "lebesgue:2", "--fn", "bogus:1"],
        ["suite", "nope"],
        ["eval-norm"],
    ],
)
def test_spec_errors_exit_3(capsys, argv):
    assert main(argv) == 3


def test_parse_helpers():
    assert _parse_tmin("2^-40") == 2.0 ** -40
    assert _parse_tmin("1e-6") == 1e-6
    g = make_grid(K=4, t_min=2.0 ** -20)
    f = parse_fn("indicator:0.25,0.5", g)
    assert f.integral() == pytest.approx(0.25)
    # s^-1/2 integrates to 2
    assert parse_fn("power:1/2", g).integral() == pytest.approx(2.0, rel=1e-12)


def test_env_grid(monkeypatch, capsys, caplog):
    caplog.set_level(logging.INFO, logger="rikit")
    monkeypatch.setenv("RSK_GRID_K", "4")
    monkeypatch.setenv("RSK_TMIN", "2^-20")
    code, _, err = run(capsys, "eval-norm", "--family", "lebesgue:1", "--fn", "constant:1")
    assert code == 0
    assert _config(caplog)["grid"]["K"] == 4


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rikit", "suite", "--list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "iteration" in proc.stdout
