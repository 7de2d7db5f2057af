"""Checks of the finite-N spectrum of the inverse covariance against its asymptotic eigenvalue distribution.

For any continuous F, ``(1/N) sum_m F(alpha_m)`` tends to the mean of ``F(g(r, w))`` over
``[0, 1] x [-pi, pi]``. The moment checks use ``F(x) = x^k``; the weak norm is the square root of the
second moment. Quadrature failures are reported on the check, never raised.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from TVAR_Rate_Distortion.errors import DomainError
from TVAR_Rate_Distortion.matrices.band_matrices import build_phi, build_phi_inv
from TVAR_Rate_Distortion.model.simulator import simulate
from TVAR_Rate_Distortion.model.spectrum import SpectrumGrid, sample_spectrum
from TVAR_Rate_Distortion.model.tvar_model import FloatArray, TvarModel, g_upper_bound
from TVAR_Rate_Distortion.rate_distortion.asymptotic_rd import SurfaceIntegrator
from TVAR_Rate_Distortion.rate_distortion.curves import count_increases
from TVAR_Rate_Distortion.rate_distortion.quadrature import QuadConfig, QuadResult, refine
from TVAR_Rate_Distortion.spectral.eigen import EigenSpectrum, eigenvalues
from TVAR_Rate_Distortion.utils import load_area_config

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)


def _relative(trace_avg: float, integral: float) -> tuple[float, float]:
    abs_err = abs(trace_avg - integral)
    return abs_err, abs_err / max(abs(integral), EPS)


@dataclass(frozen=True)
class MomentReport:
    """Trace average of ``alpha^k`` against the surface mean of ``g^k``."""

    n: int
    k: int
    trace_avg: float
    integral: float
    abs_err: float
    rel_err: float
    rel_tol: float = 1e-2
    converged: bool = True

    @property
    def passed(self) -> bool:
        """True when the quadrature converged and ``rel_err <= rel_tol``."""
        return self.converged and self.rel_err <= self.rel_tol

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON record of this check."""
        return {
            "check": "moment",
            "n": self.n,
            "k": self.k,
            "trace_avg": self.trace_avg,
            "integral": self.integral,
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "converged": self.converged,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class FunctionalReport:
    """Trace average of ``F(alpha)`` against the surface mean of ``F(g)``."""

    n: int
    label: str
    trace_avg: float
    integral: float
    abs_err: float
    rel_err: float
    converged: bool = True

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON record of this check."""
        return {"check": "functional", "n": self.n, "label": self.label, "trace_avg": self.trace_avg, "integral": self.integral, "abs_err": self.abs_err, "rel_err": self.rel_err, "converged": self.converged}


@dataclass(frozen=True)
class WeakNormReport:
    """``sqrt((1/N) sum alpha^2)`` against ``sqrt`` of the surface mean of ``g^2``."""

    n: int
    weak_norm: float
    integral_norm: float
    abs_err: float
    rel_err: float
    rel_tol: float = 1e-2
    converged: bool = True

    @property
    def passed(self) -> bool:
        """True when the quadrature converged and ``rel_err <= rel_tol``."""
        return self.converged and self.rel_err <= self.rel_tol

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON record of this check."""
        return {
            "check": "weak_norm",
            "n": self.n,
            "weak_norm": self.weak_norm,
            "integral_norm": self.integral_norm,
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "converged": self.converged,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class RangeReport:
    """Where the eigenvalues sit relative to the sampled range of ``g``."""

    n: int
    g_min: float
    g_max: float
    margin: float
    fraction_outside: float
    max_eigenvalue: float
    bound: float

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON record of this check."""
        return {
            "check": "eigenvalue_range",
            "n": self.n,
            "g_min": self.g_min,
            "g_max": self.g_max,
            "margin": self.margin,
            "fraction_outside": self.fraction_outside,
            "max_eigenvalue": self.max_eigenvalue,
            "bound": self.bound,
        }


@dataclass(frozen=True)
class LogDetReport:
    """Sum of log eigenvalues against ``-N log sigma^2`` (``det A = 1``)."""

    n: int
    log_det: float
    expected: float
    abs_err: float
    tol: float

    @property
    def passed(self) -> bool:
        """True when the log-determinants agree within ``tol``, i.e. the determinants within ``tol`` relative."""
        return self.abs_err <= self.tol

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON record of this check."""
        return {"check": "log_det", "n": self.n, "log_det": self.log_det, "expected": self.expected, "abs_err": self.abs_err, "passed": self.passed}


@dataclass(frozen=True)
class CovarianceReport:
    """Empirical covariance of simulated paths against the exact covariance."""

    n: int
    num_paths: int
    seed: int
    max_abs_dev: float
    max_standard_error: float
    threshold: float

    @property
    def passed(self) -> bool:
        """True when the largest deviation stays under the Monte-Carlo threshold."""
        return self.max_abs_dev <= self.threshold

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON record of this check."""
        return {
            "check": "covariance_mc",
            "n": self.n,
            "num_paths": self.num_paths,
            "seed": self.seed,
            "max_abs_dev": self.max_abs_dev,
            "max_standard_error": self.max_standard_error,
            "threshold": self.threshold,
            "passed": self.passed,
        }


class SpectralVerifier:
    """Runs the spectral checks for one model, sharing decompositions and surface integrals between them."""

    def __init__(self, model: TvarModel, quad: QuadConfig | None = None, rel_tol: float | None = None):
        """
        Initialize from the verify config.

        Args:
            model (TvarModel): Source model.
            quad (QuadConfig | None): Quadrature layout for the surface means.
            rel_tol (float | None): Pass threshold for moment and weak-norm relative errors.
        """
        self.config = load_area_config("verify")
        self.model = model
        self.quad = quad or QuadConfig.from_config()
        self.rel_tol = float(self.config["rel_tol"]) if rel_tol is None else rel_tol
        self.integrator = SurfaceIntegrator(model, self.quad)
        self._spectra: dict[int, EigenSpectrum] = {}
        self._moments: dict[int, QuadResult] = {}

    def spectrum(self, n: int) -> EigenSpectrum:
        """Eigenvalues of the N x N inverse covariance, computed once per N."""
        if n not in self._spectra:
            self._spectra[n] = eigenvalues(build_phi_inv(self.model, n))
        return self._spectra[n]

    def surface_mean(self, func: Callable[[FloatArray], FloatArray]) -> QuadResult:
        """Refined mean of ``func(g)`` over the (r, w) domain."""
        return refine(lambda level: self.integrator.mean(level, lambda g: (func(g),)), self.quad, scales=(EPS,))

    def surface_moment(self, k: int) -> QuadResult:
        """Refined mean of ``g^k``, computed once per k."""
        if k not in self._moments:
            self._moments[k] = self.surface_mean(lambda g: g**k)
        return self._moments[k]

    def moment(self, n: int, k: int) -> MomentReport:
        """Compare ``(1/N) trace((Phi_N^-1)^k)`` with the surface mean of ``g^k``."""
        if k < 0:
            msg = f"Moment order must be >= 0, got {k}"
            raise DomainError(msg)
        if k == 0:
            return MomentReport(n=n, k=0, trace_avg=1.0, integral=1.0, abs_err=0.0, rel_err=0.0, rel_tol=self.rel_tol)
        result = self.surface_moment(k)
        trace_avg = self.spectrum(n).power_mean(k)
        abs_err, rel_err = _relative(trace_avg, result.values[0])
        if not result.converged:
            logger.warning("Surface mean of g^%d not converged; moment check at N=%d marked failed", k, n)
        return MomentReport(n=n, k=k, trace_avg=trace_avg, integral=result.values[0], abs_err=abs_err, rel_err=rel_err, rel_tol=self.rel_tol, converged=result.converged)

    def weak_norm(self, n: int) -> WeakNormReport:
        """Compare the weak norm of ``Phi_N^-1`` with its asymptotic value."""
        second = self.moment(n, 2)
        weak, limit = math.sqrt(second.trace_avg), math.sqrt(second.integral)
        abs_err, rel_err = _relative(weak, limit)
        return WeakNormReport(n=n, weak_norm=weak, integral_norm=limit, abs_err=abs_err, rel_err=rel_err, rel_tol=self.rel_tol, converged=second.converged)

    def functional(self, n: int, func: Callable[[FloatArray], FloatArray], label: str = "F") -> FunctionalReport:
        """Compare ``(1/N) sum F(alpha)`` with the surface mean of ``F(g)`` for a vectorized ``F``."""
        result = self.surface_mean(func)
        trace_avg = math.fsum(func(self.spectrum(n).values)) / n
        abs_err, rel_err = _relative(trace_avg, result.values[0])
        return FunctionalReport(n=n, label=label, trace_avg=trace_avg, integral=result.values[0], abs_err=abs_err, rel_err=rel_err, converged=result.converged)

    def eigenvalue_range(self, n: int, grid: SpectrumGrid | None = None, margin: float | None = None) -> RangeReport:
        """Fraction of eigenvalues outside ``[g_min (1 - margin), g_max (1 + margin)]`` and the largest one."""
        grid = grid or sample_spectrum(self.model)
        margin = float(self.config["range_margin"]) if margin is None else margin
        values = self.spectrum(n).values
        outside = (values < grid.g_min * (1.0 - margin)) | (values > grid.g_max * (1.0 + margin))
        return RangeReport(
            n=n,
            g_min=grid.g_min,
            g_max=grid.g_max,
            margin=margin,
            fraction_outside=float(np.count_nonzero(outside)) / values.size,
            max_eigenvalue=float(values[-1]),
            bound=float(g_upper_bound(self.model, grid.r_nodes).max()),
        )

    def log_determinant(self, n: int, tol: float = 1e-6) -> LogDetReport:
        """Compare ``sum log alpha`` with ``-N log sigma^2``."""
        log_det = self.spectrum(n).log_det()
        expected = -n * math.log(self.model.noise_variance)
        return LogDetReport(n=n, log_det=log_det, expected=expected, abs_err=abs(log_det - expected), tol=tol)

    def run(self, n_list: list[int] | None = None, k_list: list[int] | None = None) -> "VerificationSuite":
        """Run the moment, weak-norm, range and log-determinant checks over an N ladder."""
        n_list = list(n_list or self.config["n_list"])
        k_list = list(self.config["k_list"] if k_list is None else k_list)
        grid = sample_spectrum(self.model)
        moments = tuple(self.moment(n, k) for k in k_list for n in n_list)
        weak_norms = tuple(self.weak_norm(n) for n in n_list)
        ranges = tuple(self.eigenvalue_range(n, grid) for n in n_list)
        log_dets = tuple(self.log_determinant(n) for n in n_list)
        suite = VerificationSuite(moments, weak_norms, ranges, log_dets, monotone_slack=float(self.config["monotone_slack"]))
        for k in k_list:
            if not suite.ladder_monotone(k):
                logger.warning("Moment k=%d: rel_err grows on more than one step of the N ladder", k)
        logger.info("Verification of '%s' over N=%s: %s", self.model.name, n_list, "passed" if suite.passed else "FAILED")
        return suite


@dataclass(frozen=True)
class VerificationSuite:
    """All reports of one verification run."""

    moments: tuple[MomentReport, ...]
    weak_norms: tuple[WeakNormReport, ...]
    ranges: tuple[RangeReport, ...] = ()
    log_dets: tuple[LogDetReport, ...] = ()
    monotone_slack: float = 1e-12
    extra: dict[str, Any] = field(default_factory=dict, compare=False)

    def ladder_monotone(self, k: int) -> bool:
        """True when the moment-k relative error grows on at most one ladder step."""
        rel_errs = [report.rel_err for report in sorted(self.moments, key=lambda r: r.n) if report.k == k]
        return count_increases(rel_errs, self.monotone_slack) <= 1

    @property
    def passed(self) -> bool:
        """True when every moment and weak-norm check meets its threshold."""
        return all(r.passed for r in self.moments) and all(r.passed for r in self.weak_norms)

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON report."""
        ks = sorted({r.k for r in self.moments})
        return {
            "passed": self.passed,
            "ladder_monotone": {str(k): self.ladder_monotone(k) for k in ks},
            "reports": [r.to_dict() for r in (*self.moments, *self.weak_norms, *self.ranges, *self.log_dets)],
            **self.extra,
        }


def moment_check(model: TvarModel, n: int, k: int, quad: QuadConfig | None = None) -> MomentReport:
    """Compare the k-th spectral moment of ``Phi_N^-1`` with its asymptotic value."""
    return SpectralVerifier(model, quad).moment(n, k)


def functional_check(model: TvarModel, n: int, func: Callable[[FloatArray], FloatArray], quad: QuadConfig | None = None, label: str = "F") -> FunctionalReport:
    """Compare ``(1/N) sum F(alpha)`` with the surface mean of ``F(g)``."""
    return SpectralVerifier(model, quad).functional(n, func, label)


def weak_norm_check(model: TvarModel, n: int, quad: QuadConfig | None = None) -> WeakNormReport:
    """Compare the weak norm of ``Phi_N^-1`` with its asymptotic value."""
    return SpectralVerifier(model, quad).weak_norm(n)


def eigenvalue_range_check(model: TvarModel, n: int, grid: SpectrumGrid | None = None, margin: float | None = None) -> RangeReport:
    """Locate the eigenvalues of ``Phi_N^-1`` relative to the sampled range of ``g``."""
    return SpectralVerifier(model).eigenvalue_range(n, grid, margin)


def log_determinant_check(model: TvarModel, n: int, tol: float = 1e-6) -> LogDetReport:
    """Check ``det(Phi_N^-1) = sigma^(-2N)`` through log-determinants."""
    return SpectralVerifier(model).log_determinant(n, tol)


def covariance_mc_check(model: TvarModel, n: int, num_paths: int, seed: int, z_score: float | None = None) -> CovarianceReport:
    """
    Compare the empirical covariance of simulated paths with ``build_phi``.

    The threshold is ``z_score`` times the largest entrywise standard error
    ``sqrt((Phi_ii Phi_jj + Phi_ij^2) / num_paths)`` of the zero-mean sample covariance.

    Args:
        model (TvarModel): Source model.
        n (int): Path length; small values keep the dense covariance cheap.
        num_paths (int): Number of simulated paths.
        seed (int): Innovation seed.
        z_score (float | None): Threshold multiplier; defaults to the verify config.

    Returns
    -------
        CovarianceReport: Deterministic given the arguments.
    """
    if z_score is None:
        z_score = float(load_area_config("verify")["mc_z_score"])
    x = simulate(model, n, num_paths, seed).paths
    empirical = x.T @ x / num_paths
    phi = build_phi(model, n)
    diag = np.diag(phi)
    standard_error = np.sqrt((np.outer(diag, diag) + phi**2) / num_paths)
    max_se = float(standard_error.max())
    report = CovarianceReport(
        n=n,
        num_paths=num_paths,
        seed=seed,
        max_abs_dev=float(np.abs(empirical - phi).max()),
        max_standard_error=max_se,
        threshold=z_score * max_se,
    )
    logger.info("Covariance check N=%d, %d paths: max deviation %.4g (threshold %.4g)", n, num_paths, report.max_abs_dev, report.threshold)
    return report
