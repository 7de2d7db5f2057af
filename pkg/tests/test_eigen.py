import math

import numpy as np
import pytest
import scipy.linalg
from numpy.testing import assert_allclose

from TVAR_Rate_Distortion.errors import InputError
from TVAR_Rate_Distortion.matrices.band_matrices import SymBandMatrix, build_phi_inv
from TVAR_Rate_Distortion.spectral.eigen import eigenvalues


def test_scaled_identity(white_noise):
    spectrum = eigenvalues(build_phi_inv(white_noise.scaled(2.0), 5))
    assert spectrum.n == 5
    assert_allclose(spectrum.values, np.full(5, 0.5), rtol=1e-15)


def test_ar1_3x3_matches_characteristic_polynomial(ar1):
    matrix = build_phi_inv(ar1, 3)
    roots = np.sort(np.roots(np.poly(matrix.to_dense())).real)
    assert_allclose(eigenvalues(matrix).values, roots, rtol=1e-10)


def test_tridiagonal_driver_is_used_for_first_order(mocker, tvar_affine):
    spy = mocker.spy(scipy.linalg, "eigvalsh_tridiagonal")
    eigenvalues(build_phi_inv(tvar_affine, 32))
    assert spy.call_count == 1


@pytest.mark.parametrize("name", ["tvar_affine", "tvar2", "tvar3"])
def test_band_eigenvalues_match_dense_solver(name, request):
    model = request.getfixturevalue(name)
    matrix = build_phi_inv(model, 50)
    spectrum = eigenvalues(matrix)
    dense = np.linalg.eigvalsh(matrix.to_dense())
    assert_allclose(spectrum.values, dense, rtol=1e-10)
    assert np.all(np.diff(spectrum.values) >= 0)
    assert spectrum.values[0] > 0
    assert spectrum.trace_rel_err <= 1e-9
    assert spectrum.residual == 50 * np.finfo(float).eps


@pytest.mark.parametrize("name", ["ar1", "tvar2", "tvar3"])
def test_log_determinant_matches_unit_determinant_of_A(name, request):
    model = request.getfixturevalue(name)
    n = 64
    spectrum = eigenvalues(build_phi_inv(model, n))
    assert spectrum.log_det() == pytest.approx(-n * math.log(model.noise_variance), abs=1e-6)


def test_power_mean_and_inverse_mean(tvar2):
    spectrum = eigenvalues(build_phi_inv(tvar2, 20))
    assert spectrum.power_mean(0) == 1.0
    assert spectrum.power_mean(1) == pytest.approx(build_phi_inv(tvar2, 20).trace() / 20, rel=1e-12)
    assert spectrum.inverse_mean() == pytest.approx(np.mean(1.0 / spectrum.values), rel=1e-14)


def test_single_entry_matrix(ar1):
    spectrum = eigenvalues(build_phi_inv(ar1, 1))
    assert_allclose(spectrum.values, [1.0])


def test_non_finite_entries_are_rejected():
    band = np.array([[1.0, np.nan, 1.0], [0.5, 0.5, 0.0]])
    with pytest.raises(InputError):
        eigenvalues(SymBandMatrix(n=3, bandwidth=1, band=band))
