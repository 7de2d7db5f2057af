import json
from pathlib import Path

import pytest

from TVAR_Rate_Distortion.artifacts.writers import read_curve_csv
from TVAR_Rate_Distortion.main import EXIT_CONVERGENCE, EXIT_INPUT, EXIT_OK, EXIT_VALIDATION, EXIT_VERIFICATION, main
from TVAR_Rate_Distortion.rate_distortion.finite_rd import FiniteRateDistortion
from TVAR_Rate_Distortion.rate_distortion.quadrature import QuadResult

MODELS_DIR = Path(__file__).resolve().parents[1] / "models"
UNIT_ROOT = {"name": "unit_root", "order": 1, "noise_variance": 1.0, "coeffs": [[-1.0]]}


def test_finite_curve_in_bits(tmp_path):
    out = tmp_path / "curve.csv"
    code = main(["curve", "--model", str(MODELS_DIR / "white_noise.json"), "--method", "finite", "--n", "16", "--points", "8", "--units", "bits", "--out", str(out), "--quiet"])
    assert code == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "theta,distortion,rate_nats,rate_bits"
    assert len(lines) == 9
    meta = json.loads(out.with_suffix(".json").read_text(encoding="utf-8"))
    assert meta["units"] == "bits"
    assert meta["source_tag"] == "finite N=16"


def test_asymptotic_curve_is_reproducible(tmp_path):
    args = ["curve", "--model", str(MODELS_DIR / "ar1.json"), "--points", "4", "--workers", "2", "--quiet"]
    assert main([*args, "--out", str(tmp_path / "a.csv")]) == EXIT_OK
    assert main([*args, "--out", str(tmp_path / "b.csv"), "--workers", "1"]) == EXIT_OK
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_finite_and_asymptotic_curves_agree_for_ar1(tmp_path, ar1):
    model = str(MODELS_DIR / "ar1.json")
    assert main(["curve", "--model", model, "--points", "12", "--out", str(tmp_path / "asymptotic.csv"), "--quiet"]) == EXIT_OK
    assert main(["curve", "--model", model, "--method", "finite", "--n", "1024", "--points", "12", "--out", str(tmp_path / "finite.csv"), "--quiet"]) == EXIT_OK
    asymptotic = read_curve_csv(tmp_path / "asymptotic.csv")
    finite = FiniteRateDistortion(ar1, 1024)
    assert read_curve_csv(tmp_path / "finite.csv").d_max == pytest.approx(finite.d_max, rel=1e-15)
    shared = [p for p in asymptotic.points if p.distortion <= finite.d_max]
    assert len(shared) >= 10
    gaps = [abs(finite.rate_at_distortion(p.distortion).rate - p.rate) for p in shared]
    assert max(gaps) <= 0.02
    # Observed gap is about 2e-4 nats.
    assert max(gaps) <= 1e-3


def test_unconverged_curve_exits_with_convergence_code(mocker, tmp_path):
    mocker.patch(
        "TVAR_Rate_Distortion.rate_distortion.asymptotic_rd.refine",
        return_value=QuadResult(values=(1.0, 0.5), previous=(0.9, 0.4), level=6, converged=False),
    )
    out = tmp_path / "curve.csv"
    assert main(["curve", "--model", str(MODELS_DIR / "ar1.json"), "--points", "3", "--out", str(out), "--quiet"]) == EXIT_CONVERGENCE
    meta = json.loads(out.with_suffix(".json").read_text(encoding="utf-8"))
    assert meta["all_converged"] is False
    assert len(meta["unconverged_thetas"]) == 3


@pytest.mark.parametrize(
    "extra",
    [["--model", "missing.json"], [], ["--model", str(MODELS_DIR / "ar1.json"), "--method", "finite"]],
)
def test_input_problems_exit_with_input_code(tmp_path, extra):
    assert main(["curve", *extra, "--out", str(tmp_path / "c.csv"), "--quiet"]) == EXIT_INPUT


def test_malformed_model_file(tmp_path, model_file):
    path = model_file({"order": 2, "noise_variance": 1.0, "coeffs": [[0.1]]})
    assert main(["curve", "--model", str(path), "--out", str(tmp_path / "c.csv"), "--quiet"]) == EXIT_INPUT


def test_invalid_model_exits_with_validation_code(tmp_path, model_file):
    path = model_file(UNIT_ROOT)
    assert main(["curve", "--model", str(path), "--out", str(tmp_path / "c.csv"), "--quiet"]) == EXIT_VALIDATION
    assert not (tmp_path / "c.csv").exists()


def test_verify_report(tmp_path):
    out = tmp_path / "verify.json"
    code = main(["verify", "--model", str(MODELS_DIR / "ar1.json"), "--n-list", "128", "256", "--mc-paths", "2000", "--mc-n", "4", "--out", str(out), "--quiet"])
    assert code == EXIT_OK
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["passed"] is True
    assert report["covariance"]["num_paths"] == 2000
    assert report["manifest"]["command"] == "verify"


def test_verify_strict_tolerance_exits_with_verification_code(tmp_path):
    out = tmp_path / "verify.json"
    code = main(["verify", "--model", str(MODELS_DIR / "ar1.json"), "--n-list", "64", "--k-list", "1", "--rel-tol", "1e-9", "--out", str(out), "--quiet"])
    assert code == EXIT_VERIFICATION
    assert json.loads(out.read_text(encoding="utf-8"))["passed"] is False


def test_simulate_is_seeded(tmp_path):
    args = ["simulate", "--model", str(MODELS_DIR / "tvar2.json"), "--n", "12", "--paths", "3", "--seed", "9", "--quiet"]
    assert main([*args, "--out", str(tmp_path / "a.csv")]) == EXIT_OK
    assert main([*args, "--out", str(tmp_path / "b.csv")]) == EXIT_OK
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert len((tmp_path / "a.csv").read_text(encoding="utf-8").splitlines()) == 4


def test_spectrum_is_written_even_for_invalid_models(tmp_path, model_file):
    good = tmp_path / "good.csv"
    assert main(["spectrum", "--model", str(MODELS_DIR / "ar1.json"), "--nr", "3", "--nw", "5", "--out", str(good), "--quiet"]) == EXIT_OK
    assert len(good.read_text(encoding="utf-8").splitlines()) == 16

    bad = tmp_path / "bad.csv"
    assert main(["spectrum", "--model", str(model_file(UNIT_ROOT)), "--nr", "3", "--nw", "5", "--out", str(bad), "--quiet"]) == EXIT_VALIDATION
    meta = json.loads(bad.with_suffix(".json").read_text(encoding="utf-8"))
    assert meta["validation"]["is_valid"] is False


def test_plot_from_curve_files(tmp_path):
    curve = tmp_path / "finite.csv"
    main(["curve", "--model", str(MODELS_DIR / "ar1.json"), "--method", "finite", "--n", "32", "--points", "5", "--out", str(curve), "--quiet"])
    svg = tmp_path / "curves.svg"
    assert main(["plot", str(curve), "--out", str(svg), "--quiet"]) == EXIT_OK
    assert 'id="curve-0"' in svg.read_text(encoding="utf-8")
    assert main(["plot", str(tmp_path / "absent.csv"), "--out", str(svg), "--quiet"]) == EXIT_INPUT


def test_matrix_exports(tmp_path):
    band = tmp_path / "phi_inv.band"
    assert main(["matrix", "--model", str(MODELS_DIR / "tvar2.json"), "--n", "6", "--out", str(band), "--quiet"]) == EXIT_OK
    assert band.read_text(encoding="utf-8").splitlines()[0] == "6 2 0.5"
    dense = tmp_path / "phi.csv"
    assert main(["matrix", "--model", str(MODELS_DIR / "ar1.json"), "--n", "3", "--kind", "phi", "--out", str(dense), "--quiet"]) == EXIT_OK
    first_row = [float(v) for v in dense.read_text(encoding="utf-8").splitlines()[0].split(",")]
    assert first_row == pytest.approx([1.0, 0.9, 0.81], rel=1e-12)


def test_verbosity_flags_are_exclusive():
    with pytest.raises(SystemExit):
        main(["simulate", "--n", "4", "--quiet", "--verbose"])
