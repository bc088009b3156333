import json

import numpy as np
import pytest

from levysmooth import cli
from levysmooth.exceptions import ConfigError, ConvergenceError
from levysmooth.plotting import plot_csv, svg_line_plot
from levysmooth.reports import EstimateReport
from levysmooth.verify import ExperimentConfig, SUITE_DEFAULTS, load_config, run_suite

SMALL_COR32 = {"models": [{"kind": "stable", "alpha": 1.0}], "times": [0.5, 1.0],
               "grid": {"half_width": 8.0, "n": 256}}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


# --- configuration -------------------------------------------------------


def test_defaults_merge():
    cfg = ExperimentConfig.from_dict({"seed": 1, "cor32": {"times": [2.0]}})
    assert cfg.section("cor32")["times"] == [2.0]
    assert cfg.section("cor32")["f"] == SUITE_DEFAULTS["cor32"]["f"]
    assert cfg.tolerances["sigma"] == 3.0


@pytest.mark.parametrize("raw", [
    {"sede": 1},
    {"cor32": {"timez": [1.0]}},
    {"tolerances": {"sigmaa": 3}},
    {"tolerances": {"sigma": "3"}},
    {"campanato": {"modulus": {"n": 5}}},
    {"threads": 0},
    {"seed": -4},
    {"cor32": []},
    [],
])
def test_config_rejects(raw):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(raw)


@pytest.mark.parametrize("suite", ["thm31", "duhamel", "campanato"])
def test_mc_suites_need_seed(suite):
    with pytest.raises(ConfigError):
        run_suite(suite, ExperimentConfig.from_dict({}))


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    p = tmp_path / "bad.json"
    p.write_text("{")
    with pytest.raises(ConfigError):
        load_config(p)


# --- verify ----------------------------------------------------------------


def test_cor32_constant_passes_with_zero_lhs(tmp_path, capsys):
    cfg = _write(tmp_path, {"cor32": dict(SMALL_COR32, f=["constant"])})
    out = tmp_path / "out"
    assert cli.main(["verify", "--suite", "cor32", "--config", str(cfg), "--out", str(out)]) == 0
    rep = EstimateReport.from_csv(out / "cor32.csv")
    assert rep.rows and all(r.passed and r.lhs == 0.0 for r in rep.rows)
    assert (out / "summary.txt").read_text() == capsys.readouterr().out


def test_failed_check_exit_1(tmp_path):
    cfg = _write(tmp_path, {"tolerances": {"slack": 0.01}, "cor32": dict(SMALL_COR32, f=["sin"])})
    assert cli.main(["verify", "--suite", "cor32", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert "overall: FAIL" in (tmp_path / "summary.txt").read_text()


def test_output_dir_from_config(tmp_path):
    out = tmp_path / "from_cfg"
    cfg = _write(tmp_path, {"output_dir": str(out), "cor32": dict(SMALL_COR32, f=["sin"])})
    assert cli.main(["verify", "--suite", "cor32", "--config", str(cfg)]) == 0
    assert (out / "cor32.csv").exists()


@pytest.mark.parametrize("content", ["{", "[]", '{"unknown": 1}', '{"cor32": {"grid": {"n": 8}}}'])
def test_malformed_config_exit_2(tmp_path, content):
    p = tmp_path / "c.json"
    p.write_text(content)
    assert cli.main(["verify", "--suite", "cor32", "--config", str(p), "--out", str(tmp_path)]) == 2


def test_bad_arguments_exit_2(tmp_path):
    assert cli.main(["verify", "--suite", "nope", "--config", "x.json"]) == 2
    assert cli.main([]) == 2
    assert cli.main(["verify", "--suite", "thm31", "--config", str(tmp_path / "none.json")]) == 2
    cfg = _write(tmp_path, {})
    # MC suite without a seed
    assert cli.main(["verify", "--suite", "thm31", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_numerical_failure_exit_3(tmp_path, monkeypatch):
    def boom(name, cfg):
        raise ConvergenceError("picard diverged", {"iterations": 50})
    monkeypatch.setattr(cli, "run_suite", boom)
    cfg = _write(tmp_path, {})
    assert cli.main(["verify", "--suite", "cor32", "--config", str(cfg), "--out", str(tmp_path)]) == 3


# --- symbol and sample --------------------------------------------------------


def test_symbol_command(tmp_path, capsys):
    m = _write(tmp_path, {"kind": "stable", "alpha": 1.0}, "m.json")
    assert cli.main(["symbol", "--model", str(m), "--xi", "1", "--xi", "2.5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "xi,re_psi,im_psi"
    assert float(lines[1].split(",")[1]) == pytest.approx(np.pi)
    assert float(lines[2].split(",")[1]) == pytest.approx(2.5 * np.pi)


def test_symbol_validates_before_printing(tmp_path, capsys):
    m = _write(tmp_path, {"kind": "stable", "alpha": 1.0}, "m.json")
    assert cli.main(["symbol", "--model", str(m), "--xi", "1", "--xi", "a,b"]) == 2
    assert capsys.readouterr().out == ""
    assert cli.main(["symbol", "--model", str(m), "--xi", "1,2"]) == 2


def test_sample_command(tmp_path):
    m = _write(tmp_path, {"kind": "truncated_stable", "alpha": 1.5, "K": 1.0}, "m.json")
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sample", "--model", str(m), "--n", "2000", "--seed", "4", "--eps-cut", "0.01"]
    assert cli.main(args + ["--out", str(out1)]) == 0
    assert cli.main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert cli.main(["sample", "--model", str(m), "--n", "0", "--seed", "4"]) == 2


# --- plotting --------------------------------------------------------------------


def test_empty_report_plot(tmp_path):
    p = tmp_path / "empty.csv"
    EstimateReport("empty").save(p)
    svg = plot_csv(p, tmp_path / "empty.svg")
    assert svg.startswith("<svg") and "<line" in svg and "<polyline" not in svg
    assert (tmp_path / "empty.svg").read_text() == svg


def test_profile_plot_slope_annotation(tmp_path):
    t = np.geomspace(1e-3, 1e-1, 9)
    p = tmp_path / "prof.csv"
    with open(p, "w") as fh:
        fh.write("# levysmooth gradient-profile v1\nt,sup_norm,window_slope\n")
        for ti in t:
            fh.write(f"{float(ti)!r},{float(2 * ti ** -0.3)!r},\n")
    svg = plot_csv(p)
    assert "fitted slope = -0.3000" in svg


def test_modulus_plot_overlay(tmp_path):
    p = tmp_path / "mod.csv"
    r = 2.0 ** -np.arange(3, 8)
    with open(p, "w") as fh:
        fh.write("# levysmooth modulus v1\nr,omega,se,fit,residual,inconclusive\n")
        for ri in r:
            w = float(0.5 / abs(np.log2(ri)))
            fh.write(f"{float(ri)!r},{w!r},0.001,{w!r},0.0,0\n")
    svg = plot_csv(p)
    assert svg.count("<polyline") == 2
    assert "fitted exponent = 1.0000" in svg


def test_plot_cli_and_errors(tmp_path):
    rep = EstimateReport("x")
    rep.add(check="c", model="m", f="f", x=0.0, t=1.0, lhs=1.0, rhs=2.0)
    rep.save(tmp_path / "r.csv")
    assert cli.main(["plot", "--in", str(tmp_path / "r.csv"), "--out", str(tmp_path / "r.svg")]) == 0
    assert "1/1 rows pass" in (tmp_path / "r.svg").read_text()
    (tmp_path / "junk.csv").write_text("hello\n")
    assert cli.main(["plot", "--in", str(tmp_path / "junk.csv"), "--out", str(tmp_path / "j.svg")]) == 2
    (tmp_path / "text.csv").write_text("# levysmooth gradient-profile v1\nt,sup_norm\nx,1\n")
    assert cli.main(["plot", "--in", str(tmp_path / "text.csv"), "--out", str(tmp_path / "t.svg")]) == 2
    (tmp_path / "short.csv").write_text("# levysmooth modulus v1\nr,omega\n1,2\n")
    assert cli.main(["plot", "--in", str(tmp_path / "short.csv"), "--out", str(tmp_path / "s.svg")]) == 2


def test_svg_is_deterministic():
    s = [("a", [1.0, 2.0, 3.0], [1.0, 4.0, 9.0], False)]
    assert svg_line_plot(s, title="t") == svg_line_plot(s, title="t")
