import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from hh_net_epi import ConfigError, NonConvergenceError
from hh_net_epi import experiments
from hh_net_epi.cli import main
from hh_net_epi.config import parse_config, parse_degree, parse_grid, parse_period

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


ANALYTICS = """[analytics]
n = 3
lambda_L = 1
lambda_G = {lam_g}
degree = poisson mean=5
infectious_period = {period}
"""


# -- parsing -------------------------------------------------------------


def test_grids():
    assert parse_grid("1,2, 4") == [1.0, 2.0, 4.0]
    assert parse_grid("0:0.3:0.1") == [0.0, 0.1, 0.2, 0.3]
    assert parse_grid("2:10:1")[-1] == 10
    with pytest.raises(ValueError):
        parse_grid("1:0:1")


def test_distribution_specs():
    assert parse_degree("poisson mean=5").mean == 5
    assert parse_degree("geometric mean=3").mean == pytest.approx(3)
    assert parse_degree("powerlaw k_star=10 a=3.5").k_star == 10
    assert parse_period("exponential mean=2").laplace(0.5) == pytest.approx(0.5)
    for bad in ("poisson", "poisson mean=x", "poisson mean=5 p=1", "lognormal mu=1", "powerlaw k_star=3 a=2"):
        with pytest.raises(ConfigError):
            parse_degree(bad)
    for bad in ("fixed", "fixed c=1 p=2", "gamma k=2"):
        with pytest.raises(ConfigError):
            parse_period(bad)


def test_config_structure_errors():
    with pytest.raises(ConfigError):
        parse_config("[analytics]\nn=3\n[sweep]\nn=3\n")
    with pytest.raises(ConfigError):
        parse_config("[nonsense]\nn=3\n")
    with pytest.raises(ConfigError, match="seed"):
        parse_config("[simulate]\nn=3\n")


def test_diagnostic_names_file_and_line(tmp_path):
    p = write(tmp_path, "[analytics]\nn = 3\nlambda_L = 1\nlambda_G = 0.1\ndegree = poisson\ninfectious_period = fixed c=1\n")
    with pytest.raises(ConfigError) as info:
        experiments.cmd_analytics(experiments_cfg(p))
    assert f"{p}:5" in str(info.value)


def experiments_cfg(path):
    from hh_net_epi.config import load_config
    return load_config(path)


# -- commands --------------------------------------------------------------


def test_analytics_no_global_spread(tmp_path, capsys):
    p = write(tmp_path, ANALYTICS.format(lam_g=0, period="fixed c=1"))
    code, out, _ = run_cli(capsys, "analytics", "--config", p)
    rec = json.loads(out)
    assert code == 0
    assert rec["p_major"] == 0 and rec["z_final"] == 0 and rec["r_star"] == 0


def test_analytics_reference_case(capsys):
    code, out, _ = run_cli(capsys, "analytics", "--config", CONFIGS / "analytics.cfg")
    rec = json.loads(out)
    assert code == 0
    assert set(rec) == {"r_star", "sigma", "xi", "p_major", "z_final", "method_tag"}
    assert rec["r_star"] == pytest.approx(1.21723, abs=1e-4)
    assert rec["p_major"] == pytest.approx(rec["z_final"], abs=1e-9)
    assert rec["method_tag"] == "ClosedFormFixed"


def test_monte_carlo_period_needs_seed(tmp_path, capsys):
    p = write(tmp_path, ANALYTICS.format(lam_g=0.2, period="exponential mean=1") + "mc_draws = 20000\n")
    code, _, err = run_cli(capsys, "analytics", "--config", p)
    assert code == 2 and "seed" in err
    code, out, _ = run_cli(capsys, "analytics", "--config", p, "--seed", 4)
    assert code == 0 and json.loads(out)["method_tag"] == "MonteCarloEmpirical"


def _table(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    return rows


def test_critical_curve(tmp_path, capsys):
    p = write(tmp_path, """[critical-curve]
n = 2,3,10
lambda_L_times_nminus1 = 0,1,3
degree = poisson mean=5
infectious_period = fixed c=1
""")
    code, out, _ = run_cli(capsys, "critical-curve", "--config", p)
    assert code == 0
    assert out.splitlines()[0] == "n,lambda_L,lambda_L_times_nminus1,critical_lambda_G"
    rows = _table(out)
    crit = {(int(r["n"]), float(r["lambda_L_times_nminus1"])): float(r["critical_lambda_G"]) for r in rows}
    for n in (2, 3, 10):
        assert crit[(n, 0.0)] == pytest.approx(math.log(1.25), abs=1e-8)
        assert crit[(n, 0.0)] > crit[(n, 1.0)] > crit[(n, 3.0)]
    assert crit[(2, 3.0)] > crit[(3, 3.0)] > crit[(10, 3.0)]


def test_critical_curve_saturated_and_no_root(tmp_path, capsys):
    p = write(tmp_path, """[critical-curve]
n = 4
lambda_L = 0,1e6
degree = constant d=1
infectious_period = fixed c=1
""")
    code, out, err = run_cli(capsys, "critical-curve", "--config", p)
    rows = _table(out)
    assert code == 0
    assert rows[0]["critical_lambda_G"] == ""  # Constant(1) without local spread never takes off
    lam = float(rows[1]["critical_lambda_G"])
    assert (4 * 1 + 0 - 1) * (1 - math.exp(-lam)) == pytest.approx(1.0, abs=1e-6)


def test_sweep(tmp_path, capsys):
    p = write(tmp_path, """[sweep]
n = 3
lambda_L = 1
lambda_G = 0.1
infectious_period = fixed c=1
constant = d 0:2:1
poisson = mean 3
powerlaw = k_star 3,4 a=3.5
powerlaw_cutoff = kappa 10 a=1.5
""")
    code, out, _ = run_cli(capsys, "sweep", "--config", p)
    assert code == 0
    rows = _table(out)
    assert list(rows[0]) == ["family", "param", "mu_D", "p_major"]
    got = {(r["family"], float(r["param"])): float(r["p_major"]) for r in rows}
    assert got[("constant", 0.0)] == 0.0
    assert got[("powerlaw", 3.0)] == 0.0
    assert got[("powerlaw_cutoff", 10.0)] == 0.0
    # Pow(4, 7/2) has mean ~3.06, yet is supercritical while Poisson(3) is not
    assert got[("powerlaw", 4.0)] > got[("poisson", 3.0)] == 0.0


def test_shipped_sweep_config_parses(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--config", CONFIGS / "fig2.cfg")
    assert code == 0
    families = {r["family"] for r in _table(out)}
    assert families == {"poisson", "geometric", "constant", "powerlaw", "powerlaw_cutoff"}


CONVERGENCE = """[convergence]
n = 3
lambda_L = 1
lambda_G = 0.1
degree = poisson mean=8
infectious_period = fixed c=1
m = 100,200
replicates = 60
seed = 3
"""


def test_convergence(tmp_path, capsys):
    p = write(tmp_path, CONVERGENCE)
    code, out, _ = run_cli(capsys, "convergence", "--config", p)
    assert code == 0
    rows = _table(out)
    assert [int(r["m"]) for r in rows] == [100, 200]
    code, ana, _ = run_cli(capsys, "analytics", "--config",
                           write(tmp_path, CONVERGENCE.replace("convergence", "analytics"), "a.cfg"))
    rec = json.loads(ana)
    for r in rows:
        assert float(r["p_asymptotic"]) == rec["p_major"]
        assert float(r["z_asymptotic"]) == rec["z_final"]
        assert 0 <= float(r["p_hat"]) <= 1


def test_simulate_with_raw_output(tmp_path, capsys):
    p = write(tmp_path, CONVERGENCE.replace("[convergence]", "[simulate]").replace("m = 100,200", "m = 100"))
    raw = tmp_path / "raw.csv"
    code, out, _ = run_cli(capsys, "simulate", "--config", p, "--raw", raw)
    assert code == 0
    rec = json.loads(out)
    assert rec["replicates"] == 60 and rec["m"] == 100
    lines = raw.read_text().splitlines()
    assert lines[0] == "replicate,final_size,households_infected,is_major"
    assert len(lines) == 61
    assert sum(int(line.split(",")[3]) for line in lines[1:]) == rec["n_major"]


def test_command_must_match_section(tmp_path, capsys):
    code, _, err = run_cli(capsys, "sweep", "--config", CONFIGS / "analytics.cfg")
    assert code == 2 and "section" in err


def test_missing_field_exit_code(tmp_path, capsys):
    p = write(tmp_path, "[analytics]\nn = 3\nlambda_L = 1\ndegree = poisson mean=5\ninfectious_period = fixed c=1\n")
    code, _, err = run_cli(capsys, "analytics", "--config", p)
    assert code == 2 and "lambda_g" in err


def test_missing_file_exit_code(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "analytics", "--config", tmp_path / "nope.cfg")
    assert code == 2


def test_numerical_failure_exit_code(monkeypatch, capsys):
    def boom(*a, **k):
        raise NonConvergenceError("did not converge")
    monkeypatch.setattr(experiments, "summarize", boom)
    code, _, err = run_cli(capsys, "analytics", "--config", CONFIGS / "analytics.cfg")
    assert code == 3 and "converge" in err


def test_out_file_and_line_endings(tmp_path, capsys):
    out = tmp_path / "sub" / "curve.csv"
    p = write(tmp_path, "[critical-curve]\nn = 2\nlambda_L = 0,1\ndegree = poisson mean=5\ninfectious_period = fixed c=1\n")
    code, stdout, _ = run_cli(capsys, "critical-curve", "--config", p, "--out", out)
    assert code == 0 and stdout == ""
    data = out.read_bytes()
    assert b"\r" not in data and data.endswith(b"\n")


def test_console_script_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "hh_net_epi.cli", "analytics", "--config",
                          str(CONFIGS / "analytics.cfg")], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["r_star"] == pytest.approx(1.21723, abs=1e-4)


@pytest.mark.parametrize("command,text", [
    ("analytics", ANALYTICS.format(lam_g=0.2, period="exponential mean=1") + "mc_draws = 20000\nseed = 9\n"),
    ("critical-curve", "[critical-curve]\nn = 2:4:1\nlambda_L = 0:1:0.5\ndegree = geometric mean=4\n"
                       "infectious_period = zero_or_infinite p=0.7\n"),
    ("sweep", "[sweep]\nn = 2\nlambda_L = 1\nlambda_G = 0.2\ninfectious_period = fixed c=1\npoisson = mean 1:3:1\n"),
    ("convergence", CONVERGENCE),
    ("simulate", CONVERGENCE.replace("[convergence]", "[simulate]").replace("m = 100,200", "m = 100")),
], ids=lambda v: v if "\n" not in v else "")
def test_reruns_are_byte_identical(tmp_path, capsys, command, text):
    p = write(tmp_path, text)
    a, b = tmp_path / "a.out", tmp_path / "b.out"
    assert run_cli(capsys, command, "--config", p, "--out", a)[0] == 0
    assert run_cli(capsys, command, "--config", p, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
