import math
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

from TVAR_Rate_Distortion.errors import DomainError, ModelConfigError
from TVAR_Rate_Distortion.matrices.band_matrices import entry_phi_inv
from TVAR_Rate_Distortion.model.tvar_model import (
    TvarModel,
    eval_coeff,
    eval_g,
    eval_gk,
    finite_gk,
    g_level_crossings,
    g_rows,
    g_surface,
    g_upper_bound,
)

MODELS_DIR = Path(__file__).resolve().parents[1] / "models"


@pytest.mark.parametrize(
    ("data", "message"),
    [
        ({"order": 1, "noise_variance": 1.0, "coeffs": []}, "Expected 1"),
        ({"order": 0, "noise_variance": 0.0, "coeffs": []}, "noise_variance"),
        ({"order": 0, "noise_variance": -1.0, "coeffs": []}, "noise_variance"),
        ({"order": 1, "coeffs": [[0.5]]}, "missing"),
        ({"order": 1, "noise_variance": 1.0, "coeffs": [0.5]}, "list of coefficient lists"),
        ({"order": 1, "noise_variance": 1.0, "coeffs": [[]]}, "at least one term"),
        ({"order": -1, "noise_variance": 1.0, "coeffs": []}, "order"),
        ({"order": 1, "noise_variance": 1.0, "coeffs": [["x"]]}, "Non-numeric"),
    ],
)
def test_from_dict_rejects_malformed_documents(data, message):
    with pytest.raises(ModelConfigError, match=message):
        TvarModel.from_dict(data)


def test_from_json_reads_packaged_models():
    model = TvarModel.from_json(MODELS_DIR / "tvar_affine.json")
    assert model.order == 1
    assert model.coeffs == ((-0.5, -0.4),)
    assert model.name == "tvar_affine"
    assert model.to_dict() == {"name": "tvar_affine", "order": 1, "noise_variance": 1.0, "coeffs": [[-0.5, -0.4]]}


def test_from_json_wraps_parse_errors(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ModelConfigError, match="Cannot read"):
        TvarModel.from_json(path)
    with pytest.raises(ModelConfigError):
        TvarModel.from_json(tmp_path / "missing.json")


def test_model_hash_ignores_number_spelling_but_not_values():
    a = TvarModel.from_dict({"name": "m", "order": 1, "noise_variance": 1, "coeffs": [[-0.9]]})
    b = TvarModel.from_dict({"name": "m", "order": 1, "noise_variance": 1.0, "coeffs": [[-0.90]]})
    c = TvarModel.from_dict({"name": "m", "order": 1, "noise_variance": 1.0, "coeffs": [[-0.8]]})
    assert a.model_hash == b.model_hash
    assert a.model_hash != c.model_hash
    assert len(a.model_hash) == 64


def test_coeff_matrix_is_padded_to_largest_degree(tvar2):
    assert tvar2.degree == 2
    assert_allclose(tvar2.coeff_matrix, [[-0.6, 0.3, -0.1], [0.2, -0.15, 0.0]])
    assert not tvar2.is_constant


def test_is_constant_and_scaled(ar1, tvar_linear):
    assert ar1.is_constant
    assert not tvar_linear.is_constant
    scaled = ar1.scaled(3.0)
    assert scaled.noise_variance == 3.0
    assert scaled.coeffs == ar1.coeffs


def test_eval_coeff_conventions(tvar_affine):
    assert eval_coeff(tvar_affine, 0, 0.3) == 1.0
    assert eval_coeff(tvar_affine, 1, 0.5) == pytest.approx(-0.7)
    assert eval_coeff(tvar_affine, 5, 0.5) == 0.0
    with pytest.raises(DomainError):
        eval_coeff(tvar_affine, -1, 0.5)
    with pytest.raises(DomainError):
        eval_coeff(tvar_affine, 1, 1.5)


def test_eval_g_known_values(white_noise, ar1, tvar_linear):
    assert eval_g(white_noise, 0.4, 1.0) == 1.0
    assert eval_g(white_noise.scaled(2.0), 0.4, 1.0) == 0.5
    assert eval_g(ar1, 0.2, 0.0) == pytest.approx(0.01, abs=1e-15)
    assert eval_g(ar1, 0.2, math.pi) == pytest.approx(3.61, abs=1e-14)
    for omega in np.linspace(-math.pi, math.pi, 7):
        assert eval_g(tvar_linear, 0.0, float(omega)) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DomainError):
        eval_g(ar1, 0.5, 4.0)


def test_g_is_even_bounded_and_scales(tvar2):
    r = np.linspace(0.0, 1.0, 11)
    omega = np.linspace(0.0, math.pi, 17)
    g = g_surface(tvar2, r, omega)
    assert_allclose(g, g_surface(tvar2, r, -omega), rtol=1e-13)
    assert np.all(g >= 0)
    assert np.all(g <= g_upper_bound(tvar2, r)[:, None] * (1 + 1e-12))
    assert_allclose(g_surface(tvar2.scaled(4.0), r, omega), g / 4.0, rtol=1e-14)


def test_g_is_cosine_series_of_diagonal_coefficients(tvar2):
    omega = np.linspace(-math.pi, math.pi, 9)
    r = 0.3
    series = eval_gk(tvar2, 0, r) + 2 * sum(eval_gk(tvar2, k, r) * np.cos(k * omega) for k in (1, 2))
    assert_allclose(g_surface(tvar2, [r], omega)[0], series, rtol=1e-12, atol=1e-14)
    assert eval_gk(tvar2, 3, r) == 0.0
    assert eval_gk(tvar2, -1, r) == eval_gk(tvar2, 1, r)


def test_finite_gk_matches_interior_entries(tvar2):
    n = 40
    for mu in (3, 10, n - tvar2.order):
        for k in range(3):
            assert finite_gk(tvar2, n, k, mu) == pytest.approx(entry_phi_inv(tvar2, n, mu, mu - k), rel=1e-13)
    with pytest.raises(DomainError):
        finite_gk(tvar2, n, 0, n)


def test_g_rows_matches_tensor_grid(tvar2):
    r = np.array([0.1, 0.6, 0.9])
    omega = np.linspace(0.0, math.pi, 13)
    rows = np.tile(omega, (3, 1))
    assert_allclose(g_rows(tvar2, r, rows), g_surface(tvar2, r, omega), rtol=1e-13)


def test_level_crossings_of_ar1():
    model = TvarModel(order=1, coeffs=((-0.5,),), noise_variance=1.0)
    # g = 1.25 - cos(w); g = 1 at w = arccos(0.25).
    crossings = g_level_crossings(model, [0.0, 0.5], 1.0)
    assert_allclose(crossings[:, 0], math.acos(0.25), rtol=1e-12)
    assert np.all(np.isnan(g_level_crossings(model, [0.0], 10.0)))


def test_level_crossings_hit_the_level(tvar2):
    r = np.array([0.0, 0.5, 1.0])
    level = 1.5
    crossings = g_level_crossings(tvar2, r, level)
    for i in range(r.size):
        found = crossings[i][np.isfinite(crossings[i])]
        assert found.size >= 1
        assert_allclose(g_surface(tvar2, [r[i]], found)[0], level, rtol=1e-9)
