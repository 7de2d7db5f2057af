import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from TVAR_Rate_Distortion.errors import DomainError
from TVAR_Rate_Distortion.matrices.band_matrices import build_A
from TVAR_Rate_Distortion.model.simulator import simulate, simulate_from_innovations


def test_same_seed_gives_same_paths(tvar2):
    first = simulate(tvar2, 32, 5, seed=11)
    second = simulate(tvar2, 32, 5, seed=11)
    assert_array_equal(first.paths, second.paths)
    assert first.num_paths == 5
    assert first.paths.shape == (5, 32)
    assert not np.array_equal(first.paths, simulate(tvar2, 32, 5, seed=12).paths)


def test_paths_are_prefix_stable_in_the_number_of_paths(ar1):
    few = simulate(ar1, 16, 2, seed=3)
    many = simulate(ar1, 16, 6, seed=3)
    assert_array_equal(few.paths, many.paths[:2])


def test_impulse_response_of_ar1(ar1):
    x = simulate_from_innovations(ar1, np.array([[1.0, 0.0, 0.0]]))
    assert_allclose(x[0], [1.0, 0.9, 0.81], rtol=1e-15)


def test_impulse_response_follows_time_varying_coefficient(tvar_affine):
    x = simulate_from_innovations(tvar_affine, np.array([[1.0, 0.0, 0.0]]))
    second = 0.5 + 0.4 * 2 / 3
    assert_allclose(x[0], [1.0, second, second * 0.9], rtol=1e-15)


def test_paths_solve_the_triangular_system(tvar3):
    n = 12
    z = np.random.default_rng(5).standard_normal((3, n))
    x = simulate_from_innovations(tvar3, z)
    A = build_A(tvar3, n).to_dense()
    assert_allclose(x @ A.T, z, atol=1e-12)


def test_white_noise_sample_variance(white_noise):
    sample = simulate(white_noise.scaled(2.0), 4, 20000, seed=0)
    assert sample.paths.var(axis=0) == pytest.approx(np.full(4, 2.0), abs=0.15)
    assert abs(sample.paths.mean()) < 0.05


@pytest.mark.parametrize(("n", "num_paths"), [(0, 1), (4, 0)])
def test_invalid_sizes(ar1, n, num_paths):
    with pytest.raises(DomainError):
        simulate(ar1, n, num_paths, seed=0)
