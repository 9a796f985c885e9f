import json
import subprocess
import sys

import pytest

from osface import cli, suite
from osface.errors import ConfigError
from osface.report import VerificationReport, relative_residual
from osface.sampling import draw_point, make_rng, point_denominators
from osface.theta import EllipticContext

RECORD_FIELDS = {"check_name", "params", "lhs", "rhs", "residual", "tolerance", "pass",
                 "elapsed_micros"}


def run_cli(*args):
    return cli.main(list(args))


def test_eval_theta_at_zero(capsys):
    assert run_cli("eval", "theta", "--u", "0", "--q", "0.3") == 0
    assert capsys.readouterr().out.strip() == "0 0"


def test_eval_partition_function_matches_closed_form(capsys):
    args = ["--u", "0.12+0.03i,-0.2", "--h", "0.31", "--q", "0.3"]
    assert run_cli("eval", "P", *args) == 0
    p_out = capsys.readouterr().out
    assert run_cli("eval", "E", *args) == 0
    e_out = capsys.readouterr().out
    p_re, p_im = map(float, p_out.split())
    e_re, e_im = map(float, e_out.split())
    assert complex(p_re, p_im) == pytest.approx(complex(e_re, e_im), rel=1e-13)


def test_eval_closed_form_three_pairs(capsys):
    u = "0.12+0.02i,-0.21+0.01i,0.27-0.03i,0.05+0.015i,-0.33-0.01i,0.18+0.025i"
    assert run_cli("eval", "F", "--u", u, "--h", "0.23", "--q", "0.5") == 0
    re, im = map(float, capsys.readouterr().out.split())
    assert abs(complex(re, im)) > 0


def test_eval_output_is_deterministic(capsys):
    for _ in range(2):
        run_cli("eval", "theta", "--u", "0.3+0.1j", "--q", "0.7")
    first, second = capsys.readouterr().out.splitlines()
    assert first == second
    assert len(first.split()[0].replace("-", "").replace(".", "")) <= 16


def test_eval_pole_names_factor(capsys):
    assert run_cli("eval", "P", "--u", "0.1,0.2", "--h", "0", "--q", "0.3") == 2
    assert "[h]" in capsys.readouterr().err


def test_eval_usage_errors(capsys):
    assert run_cli("eval", "theta", "--u", "0", "--q", "1.5") == 2
    assert run_cli("eval", "E", "--u", "0.1,0.2", "--q", "0.3") == 2
    assert run_cli("eval", "E", "--u", "0.1,0.2,0.3", "--h", "0.3", "--q", "0.3") == 2
    assert run_cli("frobnicate") == 2


def test_verify_writes_schema_complete_records(tmp_path, capsys):
    out = tmp_path / "r.jsonl"
    assert run_cli("verify", "theta", "--samples", "3", "--q", "0.3", "--out", str(out)) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 5 * 3
    for line in lines:
        rec = json.loads(line)
        assert set(rec) == RECORD_FIELDS
        assert rec["pass"] == (rec["residual"] <= rec["tolerance"])
        assert len(rec["lhs"]) == 2 and len(rec["rhs"]) == 2
        assert rec["params"]["seed"] == suite.DEFAULT_SEED
        assert rec["elapsed_micros"] == 0
    names = [(json.loads(x)["check_name"], json.loads(x)["params"]["sample_index"])
             for x in lines]
    assert names == sorted(names)
    assert "0 failed" in capsys.readouterr().out


def test_tiny_tolerance_fails(tmp_path):
    cfg = tmp_path / "c.conf"
    cfg.write_text("samples = 2\nnome = 0.3\ntolerance.rmatrix.ybe = 1e-30\n")
    out = tmp_path / "r.jsonl"
    assert run_cli("verify", "ybe", "--config", str(cfg), "--out", str(out)) == 1
    recs = [json.loads(x) for x in out.read_text().splitlines()]
    ybe = [r for r in recs if r["check_name"] == "rmatrix.ybe"]
    assert ybe and not any(r["pass"] for r in ybe)
    assert all(r["pass"] for r in recs if r["check_name"] != "rmatrix.ybe")


def test_zero_samples_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "c.conf"
    cfg.write_text("samples = 0\n")
    assert run_cli("verify", "theta", "--config", str(cfg), "--out",
                   str(tmp_path / "r.jsonl")) == 2
    assert "samples" in capsys.readouterr().err
    assert run_cli("verify", "theta", "--samples", "0") == 2


def test_flags_override_config_and_env(tmp_path, monkeypatch):
    cfg = tmp_path / "c.conf"
    cfg.write_text("# comment\nseed = 5\nnome = 0.1, 0.5\nsamples = 4\nn_max = 3\n")
    monkeypatch.setenv(suite.CONFIG_ENV, str(cfg))
    config = suite.load_config(None, seed=9, out="x")
    assert config.seed == 9 and config.nomes == (0.1, 0.5)
    assert config.samples_per_check == 4 and config.n_max == 3 and config.out == "x"


@pytest.mark.parametrize("text", [
    "nome = 1.2\n", "bogus = 1\n", "no equals sign\n", "samples = many\n", "n_max = 9\n",
    "tolerance.theta = -1\n", "timings = maybe\n",
])
def test_bad_config_rejected(text, tmp_path):
    cfg = tmp_path / "c.conf"
    cfg.write_text(text)
    with pytest.raises(ConfigError):
        suite.load_config(cfg)


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError):
        suite.load_config(tmp_path / "missing.conf")


def test_tolerance_override_by_group():
    config = suite.SuiteConfig(nomes=(0.3,), samples_per_check=1,
                               tolerances={"ybe": 1e-30, "theta.oddness": 5.0})
    result = suite.run_suite(config, ["theta", "ybe"])
    tol = {r.check_name: r.tolerance for r in result.reports}
    assert tol["rmatrix.ybe"] == 1e-30 and tol["rmatrix.ice_rule"] == 1e-30
    assert tol["theta.oddness"] == 5.0 and tol["theta.addition"] == 1e-10


def test_unwritable_output(tmp_path):
    assert run_cli("verify", "theta", "--samples", "1", "--out",
                   str(tmp_path / "no" / "such" / "dir.jsonl")) == 2


def test_unknown_group_rejected():
    with pytest.raises(ConfigError):
        suite.run_suite(suite.SuiteConfig(samples_per_check=1), ["nope"])


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "osface", "eval", "theta", "--u", "0",
                           "--q", "0.5"], capture_output=True, text=True, check=True)
    assert proc.stdout.strip() == "0 0"


def test_report_serialization():
    r = VerificationReport("x.y", -0.0 + 1j, 2, 1e-12, 1e-10, {"u": [0.1 + 0j]})
    rec = json.loads(r.to_json())
    assert rec["lhs"] == [0.0, 1.0] and rec["pass"] is True
    assert rec["params"]["u"] == [[0.1, 0.0]]
    with pytest.raises(ValueError):
        VerificationReport("x", 0, 0, -1.0, 1.0)
    assert relative_residual(1e-3, 10.0) == pytest.approx(1e-4)
    assert relative_residual(1e-3, 0.0) == 1e-3


def test_sampler_is_reproducible_and_guarded():
    ctx = EllipticContext(0.7)
    a = draw_point(make_rng(1, "s", 2), 3, ctx)
    b = draw_point(make_rng(1, "s", 2), 3, ctx)
    c = draw_point(make_rng(1, "t", 2), 3, ctx)
    assert a == b and a != c
    assert point_denominators(a, ctx).min() > ctx.denominator_guard
    assert all(abs(x.real) <= 0.4 and abs(x.imag) <= 0.2 * ctx.tau.imag for x in a.u)
