import math

import numpy as np
import pytest

from TVAR_Rate_Distortion.errors import DistortionRangeError, DomainError
from TVAR_Rate_Distortion.rate_distortion.curves import check_curve
from TVAR_Rate_Distortion.rate_distortion.finite_rd import FiniteRateDistortion, finite_rate_at_distortion, finite_rd_curve, finite_rd_point
from TVAR_Rate_Distortion.spectral.eigen import eigenvalues
from TVAR_Rate_Distortion.matrices.band_matrices import build_phi_inv


@pytest.mark.parametrize("n", [16, 64, 256])
def test_white_noise_matches_closed_form(white_noise, n):
    curve = finite_rd_curve(white_noise, n, num_points=32)
    assert len(curve.points) == 32
    for point in curve.points:
        assert point.rate == pytest.approx(max(0.0, 0.5 * math.log(1.0 / point.distortion)), abs=1e-12)
    assert curve.source_tag == f"finite N={n}"


def test_scaled_white_noise_closed_form(white_noise):
    model = white_noise.scaled(3.0)
    for point in finite_rd_curve(model, 32, num_points=16).points:
        assert point.rate == pytest.approx(max(0.0, 0.5 * math.log(3.0 / point.distortion)), abs=1e-12)


def test_last_point_saturates(tvar_affine):
    engine = FiniteRateDistortion(tvar_affine, 128)
    curve = engine.curve(num_points=20)
    assert curve.points[-1].rate == pytest.approx(0.0, abs=1e-15)
    assert curve.points[-1].distortion == pytest.approx(engine.d_max, rel=1e-14)
    assert curve.d_max == engine.d_max
    assert check_curve(curve).passed


def test_ar1_d_max_approaches_process_variance(ar1):
    assert FiniteRateDistortion(ar1, 1024).d_max == pytest.approx(1.0 / (1.0 - 0.81), rel=1e-2)


def test_theta_monotonicity_and_bounds(tvar2):
    engine = FiniteRateDistortion(tvar2, 96)
    thetas = engine.thetas(40)
    points = [engine.point(float(t)) for t in thetas]
    d = np.array([p.distortion for p in points])
    r = np.array([p.rate for p in points])
    assert np.all(np.diff(d) >= 0)
    assert np.all(np.diff(r) <= 0)
    alpha_min = engine.spectrum.values[0]
    for theta, point in zip(thetas, points, strict=True):
        assert point.distortion <= engine.d_max * (1 + 1e-15)
        assert point.rate <= 0.5 * math.log(1.0 / (theta * alpha_min)) + 1e-12


def test_eigenvalue_order_does_not_matter(tvar2):
    spectrum = eigenvalues(build_phi_inv(tvar2, 64))
    shuffled = np.random.default_rng(7).permutation(spectrum.values)
    for theta in (0.05, 0.4, 2.0):
        assert finite_rd_point(shuffled, theta) == finite_rd_point(spectrum, theta)


def test_rate_at_distortion_white_noise(white_noise):
    point = finite_rate_at_distortion(white_noise, 128, 0.25)
    assert point.rate == pytest.approx(math.log(2.0), abs=1e-9)
    assert finite_rate_at_distortion(white_noise, 128, 1.0).rate == 0.0


@pytest.mark.parametrize("d_target", [0.05, 0.7, 2.5])
def test_inversion_round_trip(ar1, d_target):
    engine = FiniteRateDistortion(ar1, 256)
    point = engine.rate_at_distortion(d_target)
    assert abs(point.distortion - d_target) <= 1e-8
    assert engine.point(point.theta).distortion == pytest.approx(point.distortion, abs=1e-15)


def test_rate_is_zero_at_d_max(ar1):
    engine = FiniteRateDistortion(ar1, 200)
    assert engine.rate_at_distortion(engine.d_max).rate == pytest.approx(0.0, abs=1e-12)


def test_out_of_range_distortions(ar1):
    engine = FiniteRateDistortion(ar1, 64)
    with pytest.raises(DistortionRangeError) as info:
        engine.rate_at_distortion(engine.d_max * 1.01)
    assert info.value.d_max == engine.d_max
    with pytest.raises(DomainError):
        engine.rate_at_distortion(0.0)
    with pytest.raises(DomainError):
        engine.point(-1.0)
    with pytest.raises(DomainError):
        engine.thetas(1)
