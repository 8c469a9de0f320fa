import csv
import json
import math
from pathlib import Path

import pytest

from tfd_otoc.cli import fmt, main, plot_x
from tfd_otoc.config import dumps, load, loads
from tfd_otoc.errors import ConfigError, NumericalError
from tfd_otoc.noise import NoiseModel
from tfd_otoc.spinchain import INFINITE, Temperature

BASE = """\
[model]
n_sites = 3
J = 1.0
g = 1.0

[experiment]
temperatures = {temps}
prep = {prep}
evolution = {evolution}
schedule = 0.2, 0.2, 0.4
shots = {shots}
seed = 5
{extra}
"""


def write_config(tmp_path, temps="2, inf", prep="exact", evolution="exact", shots="none", extra="", name="c.ini"):
    path = tmp_path / name
    path.write_text(BASE.format(temps=temps, prep=prep, evolution=evolution, shots=shots, extra=extra))
    return path


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_fmt_and_plot_x():
    assert fmt(None) == ""
    assert fmt(-0.0) == "0"
    assert fmt(1 / 3) == "0.333333333333"
    with pytest.raises(NumericalError):
        fmt(math.nan)
    assert plot_x(INFINITE) == 1.0 and plot_x(Temperature(1)) == 0.5


def test_config_round_trip(tmp_path):
    cfg = load(write_config(tmp_path, temps="0, 0.5, inf", evolution="trotter", shots="100", extra="[noise]\nenabled = true\np2 = 0.02\n"))
    assert cfg.noise == NoiseModel(0.005, 0.02, 0.01)
    assert cfg.temperatures[-1].is_infinite
    assert loads(dumps(cfg)) == cfg


@pytest.mark.parametrize(
    "text,needle",
    [
        ("[model]\nn_sites = 3\ng = 1\n[experiment]\ntemperatures = 1\n", "J"),
        ("[model]\nn_sites = 3\nJ = 1\ng = 1\n", "temperatures"),
        ("[model]\nn_sites = 3\nJ = x\ng = 1\n[experiment]\ntemperatures = 1\n", "line 3"),
        ("[model]\nn_sites = 14\nJ = 1\ng = 1\n[experiment]\ntemperatures = 1\n", "capacity"),
        ("[model]\nn_sites = 3\nJ = 1\ng = 1\n[experiment]\ntemperatures = -1\n", "temperature"),
        ("[model]\nn_sites = 3\nJ = 1\ng = 1\n[experiment]\ntemperatures = 1\nprep = guess\n", "prep"),
        ("[model]\nn_sites = 3\nJ = 1\ng = 1\n[experiment]\ntemperatures = 1\n[noise]\nenabled = true\n", "shots"),
        ("not an ini file", "c.ini"),
    ],
)
def test_config_errors(text, needle):
    with pytest.raises(ConfigError, match=needle):
        loads(text, source="c.ini")


def test_oracle_command(tmp_path, oracle_table):
    out = tmp_path / "out"
    assert main(["oracle", "--config", str(write_config(tmp_path)), "--out", str(out)]) == 0
    rows = read_csv(out / "oracle.csv")
    assert list(rows[0]) == ["temperature", "t", "O_exact"]
    assert len(rows) == 8
    for r in rows:
        expected = oracle_table[(3, Temperature.parse(r["temperature"]), float(r["t"]))]
        assert float(r["O_exact"]) == pytest.approx(expected, abs=1e-11)
    assert (out / "oracle_Tinf.dat").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert loads(manifest["config"]) == load(tmp_path / "c.ini")


@pytest.mark.parametrize(
    "edit,code",
    [
        (lambda s: s.replace("J = 1.0\n", ""), 2),
        (lambda s: s.replace("n_sites = 3", "n_sites = 14"), 2),
        (lambda s: s.replace("temperatures = 2, inf", "temperatures ="), 2),
    ],
)
def test_config_failures_exit_2(tmp_path, capsys, edit, code):
    path = write_config(tmp_path)
    path.write_text(edit(path.read_text()))
    for cmd in ("oracle", "sweep"):
        assert main([cmd, "--config", str(path), "--out", str(tmp_path / "o")]) == code
    err = capsys.readouterr().err
    assert "error" in err


def test_missing_file_and_bad_jobs(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.ini")]) == 2
    assert main(["run", "--config", str(write_config(tmp_path)), "--jobs", "0"]) == 2
    with pytest.raises(SystemExit):
        main(["launch", "--config", "x"])


def test_run_exact_evolution_identity(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(write_config(tmp_path, temps="2")), "--out", str(out)]) == 0
    rows = read_csv(out / "series.csv")
    assert list(rows[0]) == ["temperature", "t", "O_exact", "O_state", "O_sampled", "O_postselected", "kept_fraction", "std_error"]
    for r in rows:
        assert float(r["O_state"]) == pytest.approx(float(r["O_exact"]), abs=1e-10)
        assert r["O_sampled"] == "" and r["kept_fraction"] == ""


def test_run_sampled_noiseless_keeps_all(tmp_path):
    cfg = write_config(tmp_path, evolution="trotter", shots="3000")
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    assert {r["kept_fraction"] for r in read_csv(out / "series.csv")} == {"1"}


def test_seed_flag_overrides(tmp_path):
    cfg = write_config(tmp_path, evolution="trotter", shots="500")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "a"), "--seed", "1"]) == 0
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "b"), "--seed", "2"]) == 0
    assert (tmp_path / "a/series.csv").read_bytes() != (tmp_path / "b/series.csv").read_bytes()
    assert json.loads((tmp_path / "a/manifest.json").read_text())["seed"] == 1


def test_tfd_optimize_command(tmp_path, capsys):
    extra = "[optimizer]\nrestarts = 4\n"
    cfg = write_config(tmp_path, temps="2, inf", prep="optimized", extra=extra)
    out = tmp_path / "out"
    assert main(["tfd-optimize", "--config", str(cfg), "--out", str(out)]) == 0
    rows = {r["temperature"]: r for r in read_csv(out / "tfd_parameters.csv")}
    assert float(rows["inf"]["fidelity"]) >= 0.999999999
    assert rows["inf"]["theta3"] == ""
    assert float(rows["2"]["fidelity"]) >= 0.97
    assert "warning" not in capsys.readouterr().err


def test_low_fidelity_warning(tmp_path, capsys):
    extra = "topology = uniform\n[optimizer]\nrestarts = 2\n"
    cfg = write_config(tmp_path, temps="0.5", prep="optimized", extra=extra)
    # the uniform layout cannot reach the target at T = 0.5, so a warning is expected
    assert main(["tfd-optimize", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert "below the 0.97 target" in capsys.readouterr().err


def test_sweep_outputs(tmp_path, decay_table):
    cfg = write_config(tmp_path, temps="0, 0.5, 1, 2, 3.5, 6, inf")
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    rows = read_csv(out / "decay_rates.csv")
    assert list(rows[0]) == ["temperature", "lambda_exact", "lambda_state", "lambda_sampled", "lambda_postselected"]
    lam = {r["temperature"]: float(r["lambda_exact"]) for r in rows}
    for label, value in lam.items():
        assert value == pytest.approx(decay_table[(3, Temperature.parse(label))], abs=1e-10)
    assert lam["inf"] > lam["0"]
    dat = [line.split() for line in (out / "lambda_exact.dat").read_text().splitlines() if not line.startswith("#")]
    assert len(dat) == 7 and float(dat[-1][0]) == 1.0
    assert not (out / "lambda_sampled.dat").exists()
    assert (out / "series_T3.5.csv").exists()
    for f in out.iterdir():
        text = f.read_text().lower()
        assert "nan" not in text and "inf\n" not in text.replace("inf,", "")


def test_noisy_sweep_damps_decay_rates(tmp_path):
    extra = "[noise]\nenabled = true\n"
    cfg = write_config(tmp_path, temps="0, 2, inf", evolution="trotter", shots="4000", extra=extra)
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    for r in read_csv(out / "decay_rates.csv"):
        assert abs(float(r["lambda_postselected"])) < abs(float(r["lambda_exact"]))


@pytest.mark.parametrize("command", ["oracle", "tfd-optimize", "run", "sweep"])
def test_outputs_do_not_depend_on_jobs(tmp_path, command):
    extra = "pad_depth = true\n[optimizer]\nrestarts = 2\n[noise]\nenabled = true\n"
    cfg = write_config(tmp_path, temps="1, inf", prep="optimized", evolution="trotter", shots="300", extra=extra)
    dirs = []
    for jobs in (1, 2, 1):
        out = tmp_path / f"out{len(dirs)}"
        assert main([command, "--config", str(cfg), "--out", str(out), "--jobs", str(jobs)]) == 0
        dirs.append(out)
    names = sorted(p.name for p in dirs[0].iterdir())
    for other in dirs[1:]:
        assert sorted(p.name for p in other.iterdir()) == names
        for name in names:
            assert (dirs[0] / name).read_bytes() == (other / name).read_bytes(), name
