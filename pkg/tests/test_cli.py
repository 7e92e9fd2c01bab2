import json
import subprocess
import sys

import pytest

from magrel.cli import main
from magrel.scenario import ScenarioError, parse_scenario

SMALL = """
[grid]
d = 1
n = 64
[physics]
m = 1.0
alpha_list = 0.5, 1.0
t_list = 0.1
[potential]
count = 1
[states]
count = 3
[suites]
names = kato, diamagnetic, potential_bound
"""


def test_parse_defaults_and_fields():
    sc = parse_scenario(SMALL)
    assert (sc.d, sc.n, sc.m) == (1, 64, 1.0)
    assert sc.alpha_list == [0.5, 1.0]
    assert sc.suites == ["kato", "diamagnetic", "potential_bound"]
    assert len(sc.potentials()) == 1 and len(sc.states()) == 3


def test_unknown_suite_names_line():
    with pytest.raises(ScenarioError, match=r":3: \[suites\] names"):
        parse_scenario("[suites]\n\nnames = kato, nope\n")


@pytest.mark.parametrize("text", [
    "[grid]\nd = 5\n",
    "[grid]\nn = many\n",
    "[physics]\nm = 0\nalpha_list = 0.5\n",
    "[bogus]\nx = 1\n",
    "[grid]\ncolour = red\n",
    "[potential]\nkind = linear\nmatrix = 1 2; 3 4; 5 6\n",
])
def test_invalid_scenarios(text):
    with pytest.raises(ScenarioError):
        parse_scenario(text)


def test_digest_depends_on_seed():
    a = parse_scenario(SMALL)
    b = parse_scenario(SMALL)
    assert a.digest() == b.digest()
    b.seed = 3
    assert a.digest() != b.digest()


def test_run_writes_report(tmp_path, capsys):
    cfg = tmp_path / "s.scn"
    cfg.write_text(SMALL)
    code = main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--jobs", "2"])
    assert code == 0
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert set(rep) == {"scenario_hash", "checks", "timing"}
    assert rep["timing"] is None
    assert set(rep["checks"][0]) == {"name", "paper_ref", "status", "max_violation", "tolerance", "samples"}
    assert "checks:" in capsys.readouterr().out


def test_parse_error_exit_code(tmp_path):
    cfg = tmp_path / "bad.scn"
    cfg.write_text("[suites]\nnames = unknown\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_missing_config_exit_code(tmp_path):
    assert main(["run", "--config", str(tmp_path / "absent.scn"), "--out", str(tmp_path)]) == 2


def test_tol_scale_can_force_failure(tmp_path):
    cfg = tmp_path / "s.scn"
    cfg.write_text(SMALL.replace("kato, diamagnetic, potential_bound", "quantization"))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--tol-scale", "1e-6"]) == 1


def test_kernel_table_columns(tmp_path):
    cfg = tmp_path / "s.scn"
    cfg.write_text(SMALL)
    assert main(["kernel-table", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    header = (tmp_path / "tables" / "kernel_table.csv").read_text().splitlines()[0]
    assert header == "m,alpha,d,t,r,value,method,err_estimate"


def test_selftest(tmp_path):
    assert main(["selftest", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "report.json").exists()


def test_non_power_of_two_warns(tmp_path):
    cfg = tmp_path / "s.scn"
    cfg.write_text(SMALL.replace("n = 64", "n = 48"))
    with pytest.warns(UserWarning):
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--jobs", "1"]) == 0


def test_usage_error_exit_code():
    proc = subprocess.run([sys.executable, "-m", "magrel", "frobnicate"], capture_output=True)
    assert proc.returncode == 2
