import subprocess
import sys

import pytest

from schelling1d.cli import main


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def fields(text):
    return dict(line.split(": ", 1) for line in text.strip().splitlines())


def test_thresholds(capsys):
    code, out, _ = call(capsys, "thresholds", "--rho", "0.5")
    assert code == 0
    f = fields(out)
    assert f["kappa_g"] == f["kappa_r"] == "0.353092313"


def test_lambda(capsys):
    code, out, _ = call(capsys, "lambda")
    f = fields(out)
    assert code == 0 and f["lambda"].startswith("0.38493")
    assert "dual_residual" in f


def test_classify(capsys):
    code, out, _ = call(capsys, "classify", "--rho", "0.2", "--tau-g", "0.25", "--tau-r", "0.65")
    f = fields(out)
    assert code == 0 and f["label"] == "GreenTotal" and f["reason"]


def test_probe_with_monte_carlo(capsys):
    code, out, _ = call(capsys, "probe", "--rho", "0.5", "--tau-g", "0.4", "--tau-r", "0.45",
                        "-w", "10", "--mc", "20000")
    f = fields(out)
    assert code == 0
    assert set(f) >= {"unhappy_g", "unhappy_r", "stable_g", "stable_r", "cutoffs_green"}
    assert "mc=" in f["unhappy_g"]


@pytest.mark.parametrize("argv", [
    ["simulate", "--rho", "0.5", "--tau-g", "1.2", "--tau-r", "0.4", "-w", "3", "-n", "100"],
    ["simulate", "--rho", "0.5", "--tau-g", "0.4", "--tau-r", "0.4", "-w", "3"],
    ["simulate", "--rho", "0.5", "--tau-g", "0.4", "--tau-r", "0.4", "-w", "30", "-n", "10"],
    ["simulate", "--rho", "0.5", "--tau-g", "0.4", "--tau-r", "0.4", "-w", "3", "-n", "100",
     "--dynamic", "lazy"],
    ["simulate", "--rho", "0.5", "--tau-g", "0.4", "--tau-r", "0.4", "-w", "3", "-n", "100",
     "--events", "maybe"],
    ["sweep", "--rho", "0.5", "-w", "3", "-n", "100", "--tau-r-span", "0.7:0.2"],
    ["frobnicate"],
    [],
])
def test_usage_errors_exit_1(capsys, argv):
    code, _, err = call(capsys, *argv)
    assert code == 1 and err.startswith("error:")


def test_runtime_failure_exits_2(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("not a sweep\n")
    code, _, err = call(capsys, "render", "--input", str(bad), "--out", str(tmp_path / "x.svg"))
    assert code == 2 and "error" in err
    code, _, _ = call(capsys, "render", "--input", str(tmp_path / "missing.csv"),
                      "--out", str(tmp_path / "x.svg"))
    assert code == 2


SIM = ["simulate", "--rho", "0.45", "--tau-g", "0.4", "--tau-r", "0.45", "-w", "5", "-n", "2000",
       "--seed", "11"]


def test_simulate_files_are_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.run", tmp_path / "b.run"
    code, out_a, _ = call(capsys, *SIM, "--out", str(a))
    code_b, out_b, _ = call(capsys, *SIM, "--out", str(b))
    assert code == code_b == 0
    assert out_a == out_b and a.read_bytes() == b.read_bytes()
    f = fields(out_a)
    assert f["termination"] == "finished" and "predicted" in f
    svg_a, svg_b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert call(capsys, "render", "--input", str(a), "--out", str(svg_a))[0] == 0
    assert call(capsys, "render", "--input", str(b), "--out", str(svg_b))[0] == 0
    assert svg_a.read_bytes() == svg_b.read_bytes()


def test_simulate_other_dynamics(capsys):
    base = ["simulate", "--rho", "0.5", "--tau-g", "0.6", "--tau-r", "0.7", "-w", "4", "-n",
            "400", "--seed", "2"]
    code, out, _ = call(capsys, *base, "--dynamic", "synchronous")
    assert code == 0
    code, out, _ = call(capsys, *base, "--dynamic", "perturbed:0.01", "--max-steps", "500",
                        "--events", "off")
    f = fields(out)
    assert code == 0 and f["steps"] == "500" and "stochastically_stable" in f
    code, out, _ = call(capsys, "simulate", "--rho", "0.5", "--tau-g", "0.45", "--tau-r", "0.45",
                        "-w", "20", "-n", "2000", "--harmony")
    assert code == 0 and "harmony" in fields(out)


def test_sweep_and_render_are_reproducible(capsys, tmp_path):
    argv = ["sweep", "--rho", "0.42", "-w", "4", "-n", "300", "--grid", "3", "--reps", "2",
            "--seed", "9"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    code, out, _ = call(capsys, *argv, "--out", str(a))
    assert code == 0 and "agreement" in out
    assert call(capsys, *argv, "--threads", "3", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.csv.summary.txt").read_text() == out
    svg = tmp_path / "a.svg"
    code, out, _ = call(capsys, "render", "--input", str(a), "--out", str(svg))
    assert code == 0 and fields(out)["kind"] == "landscape"
    assert svg.read_text().startswith("<svg")


def test_sweep_span_flags(capsys, tmp_path):
    out_csv = tmp_path / "s.csv"
    code, _, _ = call(capsys, "sweep", "--rho", "0.42", "-w", "3", "-n", "100", "--grid", "1",
                      "--reps", "1", "--tau-r-span", "0.6:0.7", "--tau-g-span", "0.2:0.3",
                      "--out", str(out_csv))
    assert code == 0
    row = out_csv.read_text().splitlines()[2].split(",")
    assert row[:2] == ["0.65", "0.25"]


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("rho = 0.45\ntau_g = 0.4\ntau_r = 0.45\nw = 5\nn = 2000\nseed = 3\n")
    code, out, _ = call(capsys, "--config", str(cfg), "simulate")
    assert code == 0
    f = fields(out)
    assert (f["w"], f["n"], f["seed"]) == ("5", "2000", "3")
    code, out, _ = call(capsys, "--config", str(cfg), "simulate", "--seed", "4", "-n", "1000")
    f2 = fields(out)
    assert (f2["w"], f2["n"], f2["seed"]) == ("5", "1000", "4")
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert call(capsys, "--config", str(bad), "simulate")[0] == 1
    bad.write_text("tau_g = 1.5\n")
    assert call(capsys, "--config", str(bad), "simulate")[0] == 1


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "schelling1d.cli", "lambda"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "lambda: 0.3849" in res.stdout
    res = subprocess.run([sys.executable, "-m", "schelling1d.cli", "thresholds"],
                         capture_output=True, text=True)
    assert res.returncode == 1 and "--rho" in res.stderr
