import csv
import io
import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from svgstein import SvgParams, svg_sample
from svgstein.cli import EXIT_ERROR, EXIT_OK, EXIT_VIOLATION, main


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


# --- dist -------------------------------------------------------------------

def test_dist_pdf_laplace(capsys):
    code, out = run(["dist", "pdf", "--r", "2", "--x=-1,0,1"], capsys)
    assert code == EXIT_OK
    rows = read_csv(out)
    assert [float(r["value"]) for r in rows] == pytest.approx([0.5 * math.exp(-1), 0.5, 0.5 * math.exp(-1)])


def test_dist_pdf_singular_center_is_inf(capsys):
    code, out = run(["dist", "pdf", "--r", "1", "--x", "0"], capsys)
    assert code == EXIT_OK and read_csv(out)[0]["value"] == "inf"


def test_dist_cdf_grid(capsys):
    code, out = run(["dist", "cdf", "--r", "3", "--lo", "-2", "--hi", "2", "--num", "5"], capsys)
    vals = [float(r["value"]) for r in read_csv(out)]
    assert code == EXIT_OK and len(vals) == 5 and vals[2] == pytest.approx(0.5)
    assert vals == sorted(vals)


def test_dist_sample_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert main(["dist", "sample", "--r", "1.5", "--n", "200", "--seed", "4", "--out", str(a)]) == EXIT_OK
    assert main(["dist", "sample", "--r", "1.5", "--n", "200", "--seed", "4", "--out", str(b)]) == EXIT_OK
    assert a.read_text() == b.read_text()
    assert np.loadtxt(a).shape == (200,)


def test_dist_moment(capsys):
    code, out = run(["dist", "moment", "--r", "2", "--k", "1,2"], capsys)
    assert [float(r["value"]) for r in read_csv(out)] == pytest.approx([1.0, 2.0])


def test_dist_vg_moment_is_error(capsys):
    assert main(["dist", "moment", "--r", "2", "--theta", "0.3"]) == EXIT_ERROR


# --- stein ------------------------------------------------------------------

def test_stein_eval_residual(capsys):
    code, out = run(["stein", "eval", "--r", "2.5", "--h", "sine", "--x=-2,-0.5,0.7,3"], capsys)
    rows = read_csv(out)
    assert code == EXIT_OK and len(rows) == 4
    assert max(abs(float(r["residual"])) for r in rows) < 1e-6


def test_stein_verify(capsys):
    code, out = run(["stein", "verify", "--r", "1", "--h", "indicator", "--z", "0.3",
                     "--lo", "-4", "--hi", "4", "--num", "41"], capsys)
    payload = json.loads(out)
    assert code == EXIT_OK and payload
    assert all(p["sup_ratio"] <= 1 + 1e-6 for p in payload if p["sup_ratio"] is not None)
    assert {"bound_id", "argmax_x", "bound", "observed"} <= set(payload[0])


# --- transform --------------------------------------------------------------

def test_transform_zero_bias_density_rademacher(capsys):
    code, out = run(["transform", "density", "--kind", "zero_bias", "--x=-2,0,0.5,2"], capsys)
    assert [float(r["density"]) for r in read_csv(out)] == pytest.approx([0.0, 0.5, 0.5, 0.0])


def test_transform_equilibrium_needs_order(capsys):
    assert main(["transform", "sample", "--kind", "centered_equilibrium"]) == EXIT_ERROR


def test_transform_discrete_sample(tmp_path):
    out = tmp_path / "v.txt"
    code = main(["transform", "sample", "--spec", "discrete", "--values=-1,3", "--probs", "0.75,0.25",
                 "--kind", "centered_equilibrium", "--order", "2", "--n", "500", "--out", str(out)])
    xs = np.loadtxt(out)
    assert code == EXIT_OK and xs.size == 500 and xs.min() >= -1 and xs.max() <= 3


# --- distance ---------------------------------------------------------------

def test_distance_against_target(tmp_path, capsys):
    f = tmp_path / "s.txt"
    np.savetxt(f, svg_sample(SvgParams(2.0), 20_000, seed=1))
    code, out = run(["distance", "--metric", "kolmogorov", "--sample", str(f), "--r", "2"], capsys)
    payload = json.loads(out)
    assert code == EXIT_OK and payload["metric"] == "kolmogorov" and payload["value"] < 0.02
    code, out = run(["distance", "--metric", "bounded_wasserstein", "--sample", str(f), "--r", "2",
                     "--n-boot", "0"], capsys)
    assert code == EXIT_OK and json.loads(out)["value"] < 0.04


def test_distance_two_sample(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    np.savetxt(a, [0.0, 1.0, 2.0])
    np.savetxt(b, [0.5, 1.5, 2.5])
    code, out = run(["distance", "--metric", "wasserstein", "--sample", str(a), "--sample2", str(b)], capsys)
    assert code == EXIT_OK and json.loads(out)["value"] == pytest.approx(0.5)


def test_distance_needs_target(tmp_path):
    f = tmp_path / "s.txt"
    np.savetxt(f, [0.0, 1.0])
    assert main(["distance", "--metric", "kolmogorov", "--sample", str(f)]) == EXIT_ERROR


def test_distance_missing_file():
    assert main(["distance", "--metric", "kolmogorov", "--sample", "/nonexistent/x", "--r", "1"]) == EXIT_ERROR


# --- bound ------------------------------------------------------------------

def test_bound_product(capsys):
    code, out = run(["bound", "--id", "product_wasserstein", "--m", "1000", "--n", "1000",
                     "--e-abs-x3", "1", "--e-abs-y3", "1"], capsys)
    rep = json.loads(out)
    assert code == EXIT_OK and rep["bound_value"] == pytest.approx(1287 / 64 * 2 / math.sqrt(1000), rel=1e-12)


def test_bound_violation_exit_code(capsys):
    args = ["bound", "--id", "coupling_wasserstein", "--r", "2", "--mean-abs-delta", "0.1"]
    code, out = run(args + ["--empirical", "0.5"], capsys)
    assert code == EXIT_OK and json.loads(out)["ratio"] == pytest.approx(0.5 / 1.2)
    code, _ = run(args + ["--empirical", "5"], capsys)
    assert code == EXIT_VIOLATION


def test_bound_conversion_and_limit(capsys):
    code, out = run(["bound", "--id", "wasserstein_to_kolmogorov", "--r", "1", "--d-w", "0.676"], capsys)
    assert code == EXIT_OK and json.loads(out)["bound_value"] == pytest.approx(1.075, abs=0.002)
    assert main(["bound", "--id", "wasserstein_to_kolmogorov", "--r", "1", "--d-w", "0.7"]) == EXIT_ERROR


def test_bound_geometric_sum(capsys):
    code, out = run(["bound", "--id", "geometric_sum_kolmogorov", "--sigma", "1", "--p-geo", "1e-4",
                     "--support-a=-1", "--support-b", "1"], capsys)
    rep = json.loads(out)
    assert rep["bound_value"] == pytest.approx(0.34068, abs=1e-5)
    assert rep["printed_value"] == pytest.approx(0.3408)


def test_bound_invalid_report_still_succeeds(capsys):
    code, out = run(["bound", "--id", "vg_svg_kolmogorov", "--r1", "2", "--theta1", "0.1", "--r2", "2",
                     "--mu2", "0.5"], capsys)
    rep = json.loads(out)
    assert code == EXIT_OK and rep["valid"] is False and rep["bound_value"] is None


def test_bound_unknown_id_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["bound", "--id", "nope"])
    assert exc.value.code == EXIT_ERROR


# --- experiment -------------------------------------------------------------

def test_experiment_config_grid(tmp_path, capsys):
    cfg = tmp_path / "d2.cfg"
    cfg.write_text("experiment = d2\n# two sizes\nm = 50,100\ntrials = 5000\nseed = 1\nn_boot = 0\n")
    out = tmp_path / "d2.csv"
    code = main(["experiment", "--config", str(cfg), "--out", str(out)])
    text = out.read_text()
    assert code == EXIT_OK and text.startswith("# svgstein-results/1 ")
    rows = read_csv("\n".join(text.splitlines()[1:]))
    assert [r["param_m"] for r in rows] == ["50", "100"]


def test_experiment_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("m = 50\ntrials = 2000\n")
    code, out = run(["experiment", "d2", "--config", str(cfg), "--trials", "3000", "--n-boot", "0",
                     "--format", "json"], capsys)
    payload = json.loads(out)
    assert code == EXIT_OK and payload["rows"][0]["n"] == 3000


def test_experiment_cf_diagnostic(capsys):
    code, out = run(["experiment", "cf_diagnostic", "--p", "1e-4", "--x", "discrete", "--values=-1;2",
                     "--probs", "0.6666666666666666;0.3333333333333333", "--t", "1", "--format", "json"], capsys)
    row = json.loads(out)["rows"][0]
    assert code == EXIT_OK and row["extra_ratio"] == pytest.approx(1.0, abs=0.05)


def test_experiment_inequality_suite(capsys):
    code, out = run(["experiment", "inequality_suite", "--nu-num", "5", "--x-num", "8"], capsys)
    assert code == EXIT_OK and "k0_log" in out


def test_experiment_missing_parameter(capsys):
    assert main(["experiment", "d2"]) == EXIT_ERROR
    assert main(["experiment"]) == EXIT_ERROR


@pytest.mark.skipif(shutil.which("svgstein") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["svgstein", "dist", "pdf", "--r", "2", "--x", "0"], capture_output=True, text=True)
    assert res.returncode == 0 and "0.5" in res.stdout
    res = subprocess.run(["svgstein", "bogus"], capture_output=True, text=True)
    assert res.returncode == EXIT_ERROR
