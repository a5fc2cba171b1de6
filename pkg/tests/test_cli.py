import json

import numpy as np
import pytest

from freeconv.cli import EXIT_DISAGREE, EXIT_OK, EXIT_SUITE, EXIT_USAGE, main
from freeconv.mixtures import MixtureSpec
from freeconv.stable_laws import boolean_stable_density


def run(capsys, *argv):
    rc = main(list(argv))
    cap = capsys.readouterr()
    return rc, cap.out, cap.err


def test_classify_json(capsys):
    rc, out, _ = run(capsys, "classify", "--alpha", "0.6", "--rho", "0.5")
    d = json.loads(out)
    assert rc == EXIT_OK and d["schema"] == 1
    assert d["verdict"]["decision"] is True and d["verdict"]["rule"] == "middle_band"


def test_classify_numeric_agrees(capsys):
    rc, out, _ = run(capsys, "classify", "--alpha", "0.8", "--rho", "0.5", "--numeric")
    d = json.loads(out)
    assert rc == EXIT_OK and d["agree"] is True and d["numeric"]["decision"] is False


def test_classify_disagreement_exit_code(capsys, tmp_path):
    # a tolerance far below rounding makes the verifier reject a FID law
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"grid": {"x_range": [-10, 10], "y_range": [1e-2, 1e2],
                                        "counts": [3, 2]}, "tolerances": {"im_phi": 1e-300}}))
    rc, out, _ = run(capsys, "--config", str(cfg), "classify", "--alpha", "0.3", "--rho", "1",
                     "--numeric")
    d = json.loads(out)
    assert (rc == EXIT_DISAGREE) == (d["agree"] is False)


@pytest.mark.parametrize("argv", [
    ["classify", "--alpha", "3", "--rho", "0.5"],
    ["classify", "--alpha", "x", "--rho", "0.5"],
    ["classify", "--rho", "0.5"],
    ["density", "--family", "boolean"],
    ["convolve", "--op", "free", "--lhs", "b(0.5,1)"],
    ["convolve", "--op", "freemult", "--lhs", "b(0.5,0.3)", "--rhs", "b(0.5,1)"],
    ["nonsense"],
])
def test_usage_errors(capsys, argv):
    rc, _, _ = run(capsys, *argv)
    assert rc == EXIT_USAGE


def test_density_csv_has_header_and_matches(capsys):
    rc, out, err = run(capsys, "density", "--family", "boolean", "--alpha", "0.5", "--rho", "1",
                       "--x-range", "0.1", "10", "--n", "11", "--format", "csv")
    lines = out.strip().splitlines()
    assert rc == EXIT_OK and lines[0] == "x,density" and len(lines) == 12
    x, y = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]]).T
    assert np.max(np.abs(y - boolean_stable_density(0.5, 1.0, x))) < 1e-15
    assert json.loads(err)["schema"] == 1


def test_density_json_with_normalization(capsys):
    rc, out, _ = run(capsys, "density", "--family", "boolean", "--alpha", "0.5", "--rho", "1",
                     "--x-range", "1e-8", "1e8", "--n", "4001")
    d = json.loads(out)
    assert rc == EXIT_OK and d["schema"] == 1
    assert abs(d["normalization"]["mass_estimate"] - 1) < 1e-4


def test_density_mixture_file(capsys, tmp_path):
    f = tmp_path / "sigma.json"
    f.write_text(MixtureSpec(((0.5, 1.0),)).to_json())
    rc, out, _ = run(capsys, "density", "--family", "mixture", "--sigma-file", str(f),
                     "--x-range", "0.5", "2", "--n", "3")
    d = json.loads(out)
    assert rc == EXIT_OK
    assert abs(d["density"][1] - 1 / (2 * np.pi)) < 1e-15


def test_density_classical_and_out_file(capsys, tmp_path):
    p = tmp_path / "t.csv"
    rc, _, _ = run(capsys, "density", "--family", "classical", "--alpha", "0.5",
                   "--x-range", "0.5", "2", "--n", "5", "--format", "csv", "--out", str(p))
    assert rc == EXIT_OK and p.read_text().startswith("x,density\n")


def test_convolve_boolean_power(capsys):
    rc, out, _ = run(capsys, "convolve", "--op", "boolean", "--lhs", "b(0.5,1)", "--power", "2",
                     "--x-range", "0.5", "5", "--n", "6")
    d = json.loads(out)
    x = np.array(d["x"])
    # b^{(+)2} = D_4 b for alpha = 1/2
    ref = boolean_stable_density(0.5, 1.0, x / 4) / 4
    assert rc == EXIT_OK and np.max(np.abs(np.array(d["density"]) - ref)) < 1e-12


def test_convolve_freemult_reproduces(capsys):
    rc, out, _ = run(capsys, "convolve", "--op", "freemult", "--lhs", "b(0.5,1)",
                     "--rhs", "b(0.5,1)", "--x-range", "0.2", "5", "--n", "8")
    d = json.loads(out)
    x = np.array(d["x"])
    assert rc == EXIT_OK and d["method"] == "s_transform"
    assert np.max(np.abs(np.array(d["density"]) - boolean_stable_density(1 / 3, 1.0, x))) < 1e-8


def test_convolve_classmult(capsys):
    rc, out, _ = run(capsys, "convolve", "--op", "classmult", "--lhs", "n(0.5)",
                     "--rhs", "nr(0.5)", "--x-range", "0.1", "10", "--n", "5")
    d = json.loads(out)
    x = np.array(d["x"])
    ref = x**-0.5 / (np.pi * (1 + x))
    assert rc == EXIT_OK and np.max(np.abs(np.array(d["density"]) - ref)) < 1e-6


def test_verify_cm_suite(capsys):
    rc, out, _ = run(capsys, "verify", "--suite", "cm")
    d = json.loads(out)
    assert rc == EXIT_OK and d["schema"] == 1 and d["passed"] is True


def test_verify_csv_and_failure_exit(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tolerances": {"mixture_inversion": 1e-30}, "output_format": "csv"}))
    monkeypatch.setenv("FREECONV_CONFIG", str(cfg))
    rc, out, _ = run(capsys, "verify", "--suite", "mixtures")
    assert rc == EXIT_SUITE
    assert out.splitlines()[0] == "criterion,name,passed,metric,tol,seconds"


def test_bad_config_is_usage_error(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"unknown": 1}))
    monkeypatch.setenv("FREECONV_CONFIG", str(cfg))
    rc, _, _ = run(capsys, "classify", "--alpha", "0.5", "--rho", "0.5")
    assert rc == EXIT_USAGE
