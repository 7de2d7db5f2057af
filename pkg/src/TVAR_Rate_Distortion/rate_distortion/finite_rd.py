"""Exact finite-N rate-distortion curve by reverse water-filling over the eigenvalues of the inverse covariance."""

import logging
import math

import numpy as np
import numpy.typing as npt
import scipy.optimize

from TVAR_Rate_Distortion.errors import DistortionRangeError, DomainError
from TVAR_Rate_Distortion.matrices.band_matrices import build_phi_inv
from TVAR_Rate_Distortion.model.tvar_model import FloatArray, TvarModel
from TVAR_Rate_Distortion.rate_distortion.curves import RdCurve, RdPoint
from TVAR_Rate_Distortion.spectral.eigen import EigenSpectrum, eigenvalues
from TVAR_Rate_Distortion.utils import load_area_config

logger = logging.getLogger(__name__)


def _check_theta(theta: float) -> None:
    if not (math.isfinite(theta) and theta > 0):
        msg = f"theta must be finite and > 0, got {theta!r}"
        raise DomainError(msg)


def finite_rd_point(spectrum: EigenSpectrum | npt.ArrayLike, theta: float) -> RdPoint:
    """
    Evaluate ``D = (1/N) sum min(theta, 1/alpha)`` and ``R = (1/N) sum max(0, 1/2 log(1/(theta alpha)))``.

    Both sums run over all N eigenvalues and are exactly rounded, so the result does not depend on
    eigenvalue order.

    Args:
        spectrum (EigenSpectrum | array_like): Eigenvalues of the inverse covariance.
        theta (float): Water level, > 0.

    Returns
    -------
        RdPoint: Distortion and rate in nats per letter.
    """
    _check_theta(theta)
    alpha = spectrum.values if isinstance(spectrum, EigenSpectrum) else np.asarray(spectrum, dtype=float)
    n = alpha.size
    distortion = math.fsum(np.minimum(theta, 1.0 / alpha)) / n
    rate = math.fsum(np.maximum(0.0, -0.5 * np.log(theta * alpha))) / n
    return RdPoint(theta=theta, distortion=distortion, rate=rate)


class FiniteRateDistortion:
    """Finite-N water-filling for one model and block length, sharing one eigen-decomposition."""

    def __init__(self, model: TvarModel, n: int, spectrum: EigenSpectrum | None = None):
        """
        Initialize from the curve config and compute the spectrum of the inverse covariance.

        Args:
            model (TvarModel): Source model.
            n (int): Block length N.
            spectrum (EigenSpectrum | None): Precomputed spectrum for this (model, n).
        """
        self.config = load_area_config("curve")
        self.model = model
        self.n = n
        self.spectrum = spectrum or eigenvalues(build_phi_inv(model, n))
        self.d_max = self.spectrum.inverse_mean()
        self.theta_max = 1.0 / float(self.spectrum.values[0])
        logger.info("Finite-N spectrum for '%s' (N=%d): alpha in [%.6g, %.6g], d_max %.8g", model.name, n, self.spectrum.values[0], self.spectrum.values[-1], self.d_max)

    def point(self, theta: float) -> RdPoint:
        """Return the curve point at water level ``theta``."""
        return finite_rd_point(self.spectrum, theta)

    def thetas(self, num_points: int, theta_low_factor: float | None = None) -> FloatArray:
        """Geometric water levels on ``[(1/alpha_max) * factor, 1/alpha_min]``."""
        if num_points < 2:
            msg = f"A curve needs at least 2 points, got {num_points}"
            raise DomainError(msg)
        factor = float(self.config["theta_low_factor"]) if theta_low_factor is None else theta_low_factor
        low = factor / float(self.spectrum.values[-1])
        return np.geomspace(low, self.theta_max, num_points)

    def curve(self, num_points: int | None = None, theta_low_factor: float | None = None) -> RdCurve:
        """Sweep the water level and return the finite-N curve."""
        num_points = num_points or int(self.config["num_points"])
        points = tuple(self.point(float(theta)) for theta in self.thetas(num_points, theta_low_factor))
        return RdCurve(
            points=points,
            d_max=self.d_max,
            source_tag=f"finite N={self.n}",
            settings={"method": "finite", "n": self.n, "num_points": num_points},
        )

    def rate_at_distortion(self, d_target: float) -> RdPoint:
        """
        Invert ``D(theta) = d_target`` by bisection and return the full point.

        ``D(theta)`` is continuous, nondecreasing and 1-Lipschitz, so a theta bracket of width ``tol``
        bounds the distortion mismatch by ``tol``.
        """
        if not (math.isfinite(d_target) and d_target > 0):
            msg = f"Target distortion must be > 0, got {d_target!r}"
            raise DomainError(msg)
        if d_target > self.d_max:
            raise DistortionRangeError(d_target, self.d_max)
        tol = float(self.config["finite_tol"]) * max(1.0, d_target)

        # D(theta) <= theta, so theta = d_target brackets from below.
        low, high = d_target, self.theta_max
        if self.point(low).distortion >= d_target:
            return self.point(low)
        if self.point(high).distortion <= d_target:
            return self.point(high)
        theta = scipy.optimize.bisect(
            lambda t: self.point(t).distortion - d_target,
            low,
            high,
            xtol=tol,
            maxiter=int(self.config["max_bisections"]),
        )
        result = self.point(float(theta))
        logger.debug("Finite-N inversion: D=%.10g -> theta %.10g (mismatch %.2e)", d_target, theta, result.distortion - d_target)
        return result


def finite_rd_curve(model: TvarModel, n: int, num_points: int | None = None, theta_low_factor: float | None = None) -> RdCurve:
    """Compute the finite-N curve of ``model`` at block length ``n``."""
    return FiniteRateDistortion(model, n).curve(num_points, theta_low_factor)


def finite_rate_at_distortion(model: TvarModel, n: int, d_target: float) -> RdPoint:
    """Return the finite-N point whose distortion matches ``d_target``."""
    return FiniteRateDistortion(model, n).rate_at_distortion(d_target)
