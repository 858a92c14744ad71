import csv
import json
import math
import subprocess
import sys

import pytest

from mixedplap import cli

SMALL_CHECK = ["--set", "check.n_hardy=4", "--set", "check.n_picone=50", "--set", "check.n_sigma=5",
               "--set", "check.n_split=10", "--set", "check.n_path=200", "--set", "check.n_grad=2"]


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _manifest(out):
    return json.loads((out / "manifest.json").read_text())


# -- configuration ---------------------------------------------------------------------
def test_parse_value_and_overrides():
    cfg = cli.load_config(None, ["params.p=2.5", "shape.kind=disk", "fucik.d_grid=[0, 1.5]",
                                 "fucik.continuation=false"])
    assert cfg["params"]["p"] == 2.5
    assert cfg["shape"]["kind"] == "disk"
    assert cfg["fucik"]["d_grid"] == [0, 1.5]
    assert cfg["fucik"]["continuation"] is False


def test_unknown_key_is_rejected():
    with pytest.raises(cli.ConfigError):
        cli.load_config(None, ["params.q=1"])
    with pytest.raises(cli.ConfigError):
        cli.load_config(None, ["params=3"])
    with pytest.raises(cli.ConfigError):
        cli.load_config(None, ["noequals"])


def test_toml_file(tmp_path):
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text('seed = 7\n[params]\np = 3.0\n[shape]\nresolution = 16\n')
    cfg = cli.load_config(str(cfg_file))
    assert (cfg["seed"], cfg["params"]["p"], cfg["shape"]["resolution"]) == (7, 3.0, 16)
    assert cli.load_config(str(cfg_file), seed=9)["seed"] == 9


def test_parse_d_grid():
    assert cli.parse_d_grid("0, 0.5,1,50*lambda1") == ([0.0, 0.5, 1.0], [50.0])
    with pytest.raises(ValueError):
        cli.parse_d_grid("x")


def test_mu_fraction_resolves_against_mu_max():
    rc = cli.build_run_config(cli.load_config(None, ["params.mu_fraction=0.5", "params.s=0.25",
                                                     "params.theta=0.4"]))
    from mixedplap import mu_max

    assert rc.params.mu == pytest.approx(0.5 * mu_max(0.4, 1, 2.0, 0.25))


# -- exit codes ------------------------------------------------------------------------
def test_missing_config_exits_2_and_writes_nothing(tmp_path):
    code = cli.main(["eig1", "--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path / "o")])
    assert code == cli.EXIT_CONFIG
    assert not (tmp_path / "o").exists()


def test_unknown_key_exits_2(tmp_path):
    assert cli.main(["eig1", "--set", "solver.nonsense=1", "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert not (tmp_path / "results.csv").exists()


def test_invalid_value_exits_2(tmp_path):
    assert cli.main(["eig1", "--set", "params.p=0.5", "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_inadmissible_mu_exits_3(tmp_path):
    assert cli.main(["eig1", "--set", "params.mu=5.0", "--out", str(tmp_path)]) == cli.EXIT_INADMISSIBLE


def test_nonconvergence_exits_4_with_outputs(tmp_path):
    code = cli.main(["eig1", "--set", "solver.max_iters=2", "--out", str(tmp_path)])
    assert code == cli.EXIT_NONCONVERGED
    assert _manifest(tmp_path)["exit_code"] == cli.EXIT_NONCONVERGED
    assert _rows(tmp_path / "results.csv")[0]["converged"] == "false"


# -- subcommands -----------------------------------------------------------------------
def test_eig1_local_interval(tmp_path):
    code = cli.main(["eig1", "--set", "params.a_nl=0.0", "--out", str(tmp_path)])
    assert code == cli.EXIT_OK
    rows = _rows(tmp_path / "results.csv")
    assert list(rows[0]) == cli.COLUMNS["eig1"]
    assert float(rows[0]["lambda1"]) == pytest.approx(math.pi**2, rel=1e-3)
    field = _rows(tmp_path / "field.csv")
    assert len(field) == 64
    man = _manifest(tmp_path)
    assert man["command"] == "eig1" and man["exit_code"] == 0
    assert man["constants"]["origin_status"] == "boundary"
    assert man["columns"] == cli.COLUMNS["eig1"]


def test_eig2_and_nodal_check(tmp_path):
    base = ["--set", "params.p=2.5", "--set", "params.s=0.5", "--set", "params.theta=0.5",
            "--set", "shape.resolution=32", "--set", "path.n_points=17", "--set", "path.n_seeds=1"]
    assert cli.main(["eig2", *base, "--out", str(tmp_path / "e2")]) == cli.EXIT_OK
    row = _rows(tmp_path / "e2" / "results.csv")[0]
    assert float(row["lambda2"]) > float(row["lambda1"])
    assert row["sign_changing"] == "true"
    assert cli.main(["nodal-check", *base, "--out", str(tmp_path / "nc")]) == cli.EXIT_OK
    assert _rows(tmp_path / "nc" / "results.csv")[0]["holds"] == "true"


def test_fucik_with_d_grid(tmp_path):
    code = cli.main(["fucik", "--d-grid", "0,2,3*lambda1", "--set", "params.p=2.5", "--set", "params.s=0.5",
                     "--set", "params.theta=0.5", "--set", "shape.resolution=32",
                     "--set", "path.n_points=17", "--set", "path.n_seeds=1", "--out", str(tmp_path)])
    assert code == cli.EXIT_OK
    rows = _rows(tmp_path / "results.csv")
    assert len(rows) == 3
    c = [float(r["c"]) for r in rows]
    assert c[0] >= c[1] >= c[2]
    resolved = _manifest(tmp_path)["resolved"]
    assert float(rows[2]["d"]) == pytest.approx(3 * resolved["lambda1"])
    assert resolved["d_grid"] == [float(r["d"]) for r in rows]


def test_faber_krahn_and_hks(tmp_path):
    assert cli.main(["faber-krahn", "--out", str(tmp_path / "bad")]) == cli.EXIT_CONFIG  # needs N = 2
    code = cli.main(["faber-krahn", "--set", "params.N=2", "--set", "params.s=0.5", "--set", "params.theta=0.5",
                     "--set", "faber_krahn.resolution=12",
                     "--set", 'faber_krahn.shapes=["disk", "square", "rectangle:2"]', "--out", str(tmp_path / "fk")])
    assert code == cli.EXIT_OK
    assert len(_rows(tmp_path / "fk" / "results.csv")) == 3
    code = cli.main(["hks", "--set", "params.N=2", "--set", "params.s=0.5", "--set", "params.theta=0.5",
                     "--set", "hks.resolution=12", "--out", str(tmp_path / "hks")])
    assert code == cli.EXIT_OK
    man = _manifest(tmp_path / "hks")
    assert {v["name"] for v in man["verdicts"]} == {"lambda2_above_ball", "nonincreasing", "limit_within_rtol"}


def test_hardy_prints_constants(tmp_path, capsys):
    code = cli.main(["hardy", "--set", "hardy.n_fields=3", "--out", str(tmp_path)])
    assert code == cli.EXIT_OK
    printed = capsys.readouterr().out
    consts = json.loads(printed[: printed.rindex("}") + 1])
    assert consts["C_Nps"] > 0 and consts["regime"] == "punctured"
    assert len(_rows(tmp_path / "results.csv")) == 3


# -- reproducibility -------------------------------------------------------------------
def test_check_is_deterministic(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert cli.main(["check", *SMALL_CHECK, "--seed", "3", "--out", str(a)]) == cli.EXIT_OK
    assert cli.main(["check", *SMALL_CHECK, "--seed", "3", "--out", str(b)]) == cli.EXIT_OK
    assert cli.main(["check", *SMALL_CHECK, "--seed", "4", "--out", str(c)]) == cli.EXIT_OK
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()
    assert (a / "results.csv").read_bytes() != (c / "results.csv").read_bytes()
    assert [r["property"] for r in _rows(a / "results.csv")] == [
        "interpolated_hardy", "discrete_picone", "sigma_path_convexity", "splitting", "path_lemma",
        "homogeneity", "gradient_fd"]


def test_manifest_replays_the_run(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["eig1", "--set", "shape.resolution=24", "--seed", "5", "--out", str(a)]) == 0
    assert cli.main(["eig1", "--config", str(a / "manifest.json"), "--out", str(b)]) == 0
    assert _manifest(a)["config"] == _manifest(b)["config"]
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "mixedplap.cli", "eig1", "--set", "shape.resolution=16",
                           "--out", str(tmp_path)], capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "manifest.json").is_file()
