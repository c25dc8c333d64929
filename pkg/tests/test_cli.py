import json
import subprocess
import sys
import time

import pytest

from stochsir.cli import main
from stochsir.errors import ParseError, ZeroSigma1
from stochsir.scenarios import parse_config
from stochsir.sde import Scheme

RATES = "alpha = 20\nbeta = 4\nmu = 1\nrho = 10\ngamma = 1\nsigma1 = 1\nsigma2 = -1\n"


def write(tmp_path, text, name="cfg.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_minimal_config_fills_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, RATES + "scenario = classify\n"))
    assert cfg.params.alpha == 20 and cfg.params.sigma2 == -1
    assert cfg.path.dt == 1e-3 and cfg.path.scheme is Scheme.SPLIT
    assert cfg.n_paths == 100 and cfg.seed == 0


def test_missing_key_named(tmp_path):
    text = RATES.replace("beta = 4\n", "")
    with pytest.raises(ParseError, match="beta"):
        parse_config(write(tmp_path, text))


def test_unknown_and_duplicate_keys_report_line(tmp_path):
    with pytest.raises(ParseError, match=r"line 8.*'kappa'"):
        parse_config(write(tmp_path, RATES + "kappa = 2\n"))
    with pytest.raises(ParseError, match=r"line 8.*'mu'"):
        parse_config(write(tmp_path, RATES + "mu = 2\n"))
    with pytest.raises(ParseError, match="line 8"):
        parse_config(write(tmp_path, RATES + "just words\n"))
    with pytest.raises(ParseError, match="'dt'"):
        parse_config(write(tmp_path, RATES + "dt = fast\n"))


def test_comments_and_colons(tmp_path):
    cfg = parse_config(write(tmp_path, "# header\n" + RATES.replace("mu = 1", "mu: 1  # death")))
    assert cfg.params.mu == 1


def test_zero_sigma1_exit_code(tmp_path, capsys):
    path = write(tmp_path, RATES.replace("sigma1 = 1", "sigma1 = 0"))
    with pytest.raises(ZeroSigma1):
        parse_config(path)
    assert main(["--config", str(path), "--out", str(tmp_path / "o")]) == 1
    assert "ZeroSigma1" in capsys.readouterr().err


def test_io_error_exit_code(tmp_path):
    assert main(["--config", str(tmp_path / "absent.txt")]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write(tmp_path, RATES)
    assert main(["--config", str(cfg), "--out", str(blocker / "sub"), "--quiet"]) == 2


def test_scenario_needs_params(tmp_path):
    assert main(["--scenario", "classify", "--out", str(tmp_path)]) == 1


@pytest.mark.parametrize(
    "n, verdict, kind",
    [(1, "Permanence", "BarrierRegion"), (2, "Permanence", "FullQuadrant"), (3, "Extinction", None)],
)
def test_classify_examples(tmp_path, n, verdict, kind):
    from stochsir.params import EXAMPLES

    p = EXAMPLES[n]
    text = "".join(f"{k} = {getattr(p, k)}\n" for k in
                   ("alpha", "beta", "mu", "rho", "gamma", "sigma1", "sigma2"))
    t0 = time.perf_counter()
    assert main(["--config", str(write(tmp_path, text)), "--scenario", "classify",
                 "--out", str(tmp_path), "--quiet"]) == 0
    assert time.perf_counter() - t0 < 1.0
    rep = json.loads((tmp_path / "classification.json").read_text())
    assert rep["verdict"] == verdict
    if kind:
        assert rep["support"]["kind"] == kind
    if n == 1:
        assert rep["support"]["cstar"] == pytest.approx(1.9375, abs=1e-9)
    if n == 2:
        assert rep["dstar"] == "-inf"
    if n == 3:
        assert rep["lambda"] == pytest.approx(-0.25)
        assert "-1.75" in rep["paper_note"]


def test_example1_support_boundary_first_row(tmp_path):
    assert main(["--scenario", "example1", "--paths", "20", "--out", str(tmp_path), "--quiet"]) == 0
    lines = (tmp_path / "support_boundary.csv").read_text().splitlines()
    assert lines[0] == "I,S_boundary"
    i, s = map(float, lines[1].split(","))
    assert i == 1.0 and s == pytest.approx(1.9375, abs=1e-9)
    assert (tmp_path / "trajectory.csv").read_text().startswith("t,S,I\n")


def test_example3_grids_align(tmp_path):
    assert main(["--scenario", "example3", "--paths", "50", "--out", str(tmp_path), "--quiet"]) == 0
    dens = (tmp_path / "stationary_density.csv").read_text().splitlines()[1:]
    hist = (tmp_path / "empirical_S_t50.csv").read_text().splitlines()[1:]
    assert len(dens) == len(hist) == 50
    for d_row, h_row in zip(dens, hist):
        x = float(d_row.split(",")[0])
        lo, hi, _ = map(float, h_row.split(","))
        assert lo < x < hi


def test_simulate_and_rerun_byte_identical(tmp_path):
    cfg = write(tmp_path, RATES + "scenario = simulate\nn_paths = 2\nt_final = 2\nsigma3 = 0.3\n"
                "model = full_degenerate\n")
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert main(["--config", str(cfg), "--out", str(out), "--seed", "9", "--quiet"]) == 0
        outs.append(out)
    files = sorted(f.name for f in outs[0].iterdir())
    assert files == ["summary.json", "trajectory_0000.csv", "trajectory_0001.csv"]
    for name in files:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    header = (outs[0] / "trajectory_0000.csv").read_text().splitlines()[0]
    assert header == "t,S,I,R"


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "stochsir", "--scenario", "example2", "--paths", "5",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout.strip().splitlines()[-1])["scenario"] == "example2"
