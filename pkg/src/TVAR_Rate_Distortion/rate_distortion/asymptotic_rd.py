"""Asymptotic rate-distortion curve of a TVAR source and the stationary Gaussian special case.

The asymptotic curve is the reverse water-filling double integral over the inverse-spectrum surface:

    D(theta) = (1/2pi) int_{-pi}^{pi} int_0^1 min[theta, 1/g(r, w)] dr dw
    R(theta) = (1/2pi) int_{-pi}^{pi} int_0^1 max[0, 1/2 log(1/(theta g(r, w)))] dr dw

g is even in w, so every integral is computed as a mean over ``[0, 1] x [0, pi]`` on composite
Gauss-Legendre panels refined by uniform doubling. The water-filling integrands are kinked where
``g(r, w) = 1/theta``; for each r node the w panels holding a crossing are cut there, so the w rule
only ever sees smooth pieces.
"""

import logging
import math
import sys
import threading
from collections.abc import Callable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
import scipy.optimize
from tqdm import tqdm

from TVAR_Rate_Distortion.errors import DistortionRangeError, DomainError, ModelValidationError
from TVAR_Rate_Distortion.model.spectrum import ModelValidator, ValidationReport
from TVAR_Rate_Distortion.model.tvar_model import FloatArray, TvarModel, g_level_crossings, g_rows, g_surface
from TVAR_Rate_Distortion.rate_distortion.curves import RdCurve, RdPoint
from TVAR_Rate_Distortion.rate_distortion.quadrature import QuadConfig, QuadResult, average_rule, kink_splits, refine, split_rule
from TVAR_Rate_Distortion.utils import load_area_config

logger = logging.getLogger(__name__)

Integrand = Callable[[FloatArray], Sequence[FloatArray]]

# Surfaces up to this many nodes are cached per refinement level; larger ones are streamed in row blocks.
CACHE_LIMIT = 1 << 23
BLOCK_SIZE = 1 << 20
# Rates below one nat are held to an absolute tolerance.
RATE_SCALE = 1.0


def _check_theta(theta: float) -> None:
    if not (math.isfinite(theta) and theta > 0):
        msg = f"theta must be finite and > 0, got {theta!r}"
        raise DomainError(msg)


def water_filling_integrand(theta: float) -> Integrand:
    """Integrands of D and R for the inverse spectrum ``g`` at water level ``theta``."""

    def integrand(g: FloatArray) -> tuple[FloatArray, FloatArray]:
        return np.minimum(theta, 1.0 / g), 0.5 * np.maximum(0.0, -np.log(theta * g))

    return integrand


def _row_means(values: FloatArray, weights: FloatArray) -> FloatArray:
    return np.sum(values * weights, axis=1)


class SurfaceIntegrator:
    """Means of functions of ``g(r, w)`` over ``[0, 1] x [0, pi]`` at a given refinement level."""

    def __init__(self, model: TvarModel, quad: QuadConfig):
        """
        Initialize the integrator.

        Args:
            model (TvarModel): Source model.
            quad (QuadConfig): Base panel layout; level ``l`` uses ``2**l`` times as many panels.
        """
        self.model = model
        self.quad = quad
        self._cache: dict[int, FloatArray] = {}
        self._lock = threading.Lock()

    def r_rule(self, level: int) -> tuple[FloatArray, FloatArray]:
        """Nodes and weights in r at ``level``."""
        return average_rule(0.0, 1.0, self.quad.r_panels * 2**level, self.quad.nodes_per_panel)

    def omega_rule(self, level: int) -> tuple[FloatArray, FloatArray]:
        """Nodes and weights in w at ``level`` for integrands without kinks."""
        return average_rule(0.0, math.pi, self.quad.omega_panels * 2**level, self.quad.nodes_per_panel)

    def omega_edges(self, level: int) -> FloatArray:
        """Panel edges in w at ``level``."""
        return np.linspace(0.0, math.pi, self.quad.omega_panels * 2**level + 1)

    def _blocks(self, level: int) -> Iterator[tuple[FloatArray, FloatArray]]:
        r, w_r = self.r_rule(level)
        omega, _ = self.omega_rule(level)
        if r.size * omega.size <= CACHE_LIMIT:
            with self._lock:
                if level not in self._cache:
                    self._cache[level] = g_surface(self.model, r, omega)
            yield w_r, self._cache[level]
            return
        rows = max(1, BLOCK_SIZE // omega.size)
        for start in range(0, r.size, rows):
            yield w_r[start : start + rows], g_surface(self.model, r[start : start + rows], omega)

    @staticmethod
    def _reduce(blocks: Iterator[tuple[FloatArray, Sequence[FloatArray]]]) -> list[float]:
        terms: list[list[float]] = []
        for w_r, row_means in blocks:
            for i, means in enumerate(row_means):
                if len(terms) <= i:
                    terms.append([])
                terms[i].extend((w_r * means).tolist())
        # Fixed-order, exactly rounded final reduction.
        return [math.fsum(t) for t in terms]

    def mean(self, level: int, integrand: Integrand) -> list[float]:
        """
        Integrate several smooth functions of g at once.

        Args:
            level (int): Refinement level.
            integrand (Callable): Maps a block of g values to a sequence of same-shaped arrays.

        Returns
        -------
            list[float]: One mean per array returned by ``integrand``.
        """
        w_omega = self.omega_rule(level)[1]
        return self._reduce((w_r, [values @ w_omega for values in integrand(g)]) for w_r, g in self._blocks(level))

    def water_filling(self, level: int, theta: float) -> list[float]:
        """Return ``[D, R]`` at ``theta`` with w panels cut at the crossings ``g = 1/theta``."""
        r, w_r = self.r_rule(level)
        edges = self.omega_edges(level)
        integrand = water_filling_integrand(theta)
        rows = max(1, BLOCK_SIZE // (2 * (edges.size - 1) * self.quad.nodes_per_panel))

        def blocks() -> Iterator[tuple[FloatArray, list[FloatArray]]]:
            for start in range(0, r.size, rows):
                r_block = r[start : start + rows]
                splits = kink_splits(edges, g_level_crossings(self.model, r_block, 1.0 / theta))
                omega, w_omega = split_rule(edges, splits, self.quad.nodes_per_panel)
                g = g_rows(self.model, r_block, omega)
                yield w_r[start : start + rows], [_row_means(values, w_omega) for values in integrand(g)]

        return self._reduce(blocks())


class AsymptoticRateDistortion:
    """Asymptotic water-filling for one validated model."""

    def __init__(self, model: TvarModel, quad: QuadConfig | None = None, validator: ModelValidator | None = None):
        """
        Initialize from the curve config and validate the model.

        Args:
            model (TvarModel): Source model.
            quad (QuadConfig | None): Quadrature layout; defaults to the quadrature config.
            validator (ModelValidator | None): Validator supplying the g extrema; defaults to the spectrum config.

        Raises
        ------
            ModelValidationError: When the grid infimum of g is below the validator's floor.
        """
        self.config = load_area_config("curve")
        self.model = model
        self.quad = quad or QuadConfig.from_config()
        self.validation: ValidationReport = (validator or ModelValidator()).validate(model)
        if not self.validation.is_valid:
            raise ModelValidationError(self.validation.feedback, self.validation.g_inf, self.validation.g_floor)
        self.g_min = self.validation.g_inf
        self.g_max = self.validation.g_sup
        self.theta_max = (1.0 + float(self.config["saturation_margin"])) / self.g_min
        self.integrator = SurfaceIntegrator(model, self.quad)
        self._d_max: QuadResult | None = None

    def _estimate(self, theta: float) -> QuadResult:
        return refine(lambda level: self.integrator.water_filling(level, theta), self.quad, scales=(0.0, RATE_SCALE))

    @staticmethod
    def _to_point(theta: float, result: QuadResult) -> RdPoint:
        return RdPoint(
            theta=theta,
            distortion=result.values[0],
            rate=result.values[1],
            error_estimate=max(result.errors),
            converged=result.converged,
        )

    def point(self, theta: float) -> RdPoint:
        """
        Return the converged curve point at ``theta``.

        Raises
        ------
            ConvergenceError: When the refinement budget runs out.
        """
        _check_theta(theta)
        result = self._estimate(theta)
        result.raise_if_failed()
        return self._to_point(theta, result)

    def annotated_point(self, theta: float) -> RdPoint:
        """Return the point at ``theta``; a refinement failure is recorded on the point instead of raised."""
        _check_theta(theta)
        result = self._estimate(theta)
        if not result.converged:
            logger.warning("Point at theta=%.6g not converged (error estimate %.3g)", theta, max(result.errors))
        return self._to_point(theta, result)

    def _point_at_level(self, theta: float, level: int) -> RdPoint:
        current = self.integrator.water_filling(level, theta)
        previous = self.integrator.water_filling(level - 1, theta) if level else current
        return self._to_point(theta, QuadResult(tuple(current), tuple(previous), level, converged=True))

    def d_max_result(self) -> QuadResult:
        """Refined ``(1/2pi) int int 1/g`` with its error estimate, computed once."""
        if self._d_max is None:
            result = refine(lambda level: self.integrator.mean(level, lambda g: (1.0 / g,)), self.quad)
            result.raise_if_failed()
            self._d_max = result
            logger.info("Asymptotic d_max for '%s': %.10g (error estimate %.2e, level %d)", self.model.name, result.values[0], result.errors[0], result.level)
        return self._d_max

    def d_max(self) -> float:
        """Return ``(1/2pi) int int 1/g``, the distortion at which the rate reaches 0."""
        return self.d_max_result().values[0]

    def thetas(self, num_points: int, theta_low_factor: float | None = None) -> FloatArray:
        """Geometric water levels on ``[(1/g_max) * factor, (1/g_min) * (1 + margin)]``."""
        if num_points < 2:
            msg = f"A curve needs at least 2 points, got {num_points}"
            raise DomainError(msg)
        factor = float(self.config["theta_low_factor"]) if theta_low_factor is None else theta_low_factor
        return np.geomspace(factor / self.g_max, self.theta_max, num_points)

    def curve(self, num_points: int | None = None, theta_low_factor: float | None = None, *, progress: bool = False) -> RdCurve:
        """
        Sweep the water level and return the asymptotic curve.

        Points are evaluated concurrently in order-preserving fashion; unconverged points are annotated.

        Args:
            num_points (int | None): Number of water levels.
            theta_low_factor (float | None): Lower sweep end relative to ``1/g_max``.
            progress (bool): Show a progress bar on stdout.

        Returns
        -------
            RdCurve: The curve; ``d_max`` is the distortion of the saturated last point.
        """
        num_points = num_points or int(self.config["num_points"])
        thetas = [float(t) for t in self.thetas(num_points, theta_low_factor)]
        with ThreadPoolExecutor(max_workers=self.quad.workers) as executor:
            points = list(tqdm(executor.map(self.annotated_point, thetas), total=len(thetas), desc="Curve points", unit="point", file=sys.stdout, disable=not progress))
        return RdCurve(
            points=tuple(points),
            d_max=points[-1].distortion,
            source_tag="asymptotic",
            settings={"method": "asymptotic", "num_points": num_points, "quad": self.quad.to_dict(), "g_min": self.g_min, "g_max": self.g_max},
        )

    def rate_at_distortion(self, d_target: float) -> RdPoint:
        """
        Invert ``D(theta) = d_target`` by bisection.

        The bisection runs at one fixed refinement level, the finest needed at the bracket ends and the
        midpoint; the returned point carries the change from the next coarser level as its error estimate.
        """
        if not (math.isfinite(d_target) and d_target > 0):
            msg = f"Target distortion must be > 0, got {d_target!r}"
            raise DomainError(msg)
        d_max = self.d_max_result()
        if d_target > d_max.values[0]:
            raise DistortionRangeError(d_target, d_max.values[0])
        tol = max(float(self.config["asymptotic_tol"]), 10.0 * d_max.errors[0])

        # D(theta) <= theta, so theta = d_target brackets from below.
        low, high = d_target, self.theta_max
        low_result = self._estimate(low)
        if low_result.values[0] >= d_target - tol:
            low_result.raise_if_failed()
            return self._to_point(low, low_result)
        high_result = self._estimate(high)
        if high_result.values[0] <= d_target + tol:
            high_result.raise_if_failed()
            return self._to_point(high, high_result)
        mid_result = self._estimate(math.sqrt(low * high))
        for result in (low_result, high_result, mid_result):
            result.raise_if_failed()
        level = max(low_result.level, high_result.level, mid_result.level)

        def mismatch(theta: float) -> float:
            return self.integrator.water_filling(level, theta)[0] - d_target

        if mismatch(low) >= 0:
            return self._point_at_level(low, level)
        if mismatch(high) <= 0:
            return self._point_at_level(high, level)
        theta = scipy.optimize.bisect(mismatch, low, high, xtol=float(self.config["asymptotic_tol"]), maxiter=int(self.config["max_bisections"]))
        result = self._point_at_level(float(theta), level)
        logger.debug("Asymptotic inversion: D=%.10g -> theta %.10g at level %d (mismatch %.2e)", d_target, theta, level, result.distortion - d_target)
        return result


def asymptotic_rd_point(model: TvarModel, theta: float, quad: QuadConfig | None = None) -> RdPoint:
    """Return the asymptotic curve point of ``model`` at water level ``theta``."""
    return AsymptoticRateDistortion(model, quad).point(theta)


def asymptotic_rd_curve(model: TvarModel, num_points: int | None = None, quad: QuadConfig | None = None, *, progress: bool = False) -> RdCurve:
    """Compute the asymptotic curve of ``model``."""
    return AsymptoticRateDistortion(model, quad).curve(num_points, progress=progress)


def asymptotic_rate_at_distortion(model: TvarModel, d_target: float, quad: QuadConfig | None = None) -> RdPoint:
    """Return the asymptotic point whose distortion matches ``d_target``."""
    return AsymptoticRateDistortion(model, quad).rate_at_distortion(d_target)


def d_max(model: TvarModel, quad: QuadConfig | None = None) -> float:
    """Return the per-letter average variance ``(1/2pi) int int 1/g``."""
    return AsymptoticRateDistortion(model, quad).d_max()


@dataclass(frozen=True)
class PsdGrid:
    """Power spectral density ``S(w)`` on ``[-pi, pi]``.

    Tabulated values are interpolated piecewise-linearly between nodes and held constant beyond the
    table. ``evaluator`` replaces the table when set, and ``crossings(theta)`` may then supply the
    frequencies in ``(0, pi)`` where ``S = theta``. With ``even`` set only ``[0, pi]`` is integrated; a
    table reaching negative frequencies must then be symmetric.
    """

    omega_nodes: FloatArray
    values: FloatArray
    even: bool = True
    evaluator: Callable[[FloatArray], FloatArray] | None = field(default=None, compare=False, repr=False)
    crossings: Callable[[float], FloatArray] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        """Validate the table."""
        nodes = np.asarray(self.omega_nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 2:
            msg = "PSD nodes and values must be 1-D arrays of equal length >= 2"
            raise DomainError(msg)
        if np.any(np.diff(nodes) <= 0) or nodes[0] < -math.pi or nodes[-1] > math.pi:
            msg = "PSD nodes must be strictly increasing within [-pi, pi]"
            raise DomainError(msg)
        if np.any(~np.isfinite(values)) or np.any(values < 0):
            msg = "PSD values must be finite and >= 0"
            raise DomainError(msg)
        if self.even and nodes[0] < 0:
            mirrored = np.interp(-nodes, nodes, values)
            if not np.allclose(mirrored, values, rtol=1e-12, atol=0.0):
                msg = "PSD flagged even but S(-w) != S(w)"
                raise DomainError(msg)
        object.__setattr__(self, "omega_nodes", nodes)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_samples(cls, omega: npt.ArrayLike, values: npt.ArrayLike, *, even: bool = True) -> "PsdGrid":
        """Build a tabulated PSD."""
        return cls(np.asarray(omega, dtype=float), np.asarray(values, dtype=float), even=even)

    @classmethod
    def from_model(cls, model: TvarModel, nw: int = 513) -> "PsdGrid":
        """
        Exact PSD ``S(w) = 1/g(w)`` of a constant-coefficient model.

        Raises
        ------
            DomainError: When a coefficient varies with r.
        """
        if not model.is_constant:
            msg = f"Model '{model.name}' has time-varying coefficients; it has no single PSD"
            raise DomainError(msg)

        def evaluator(omega: FloatArray) -> FloatArray:
            omega = np.atleast_2d(omega)
            return 1.0 / g_rows(model, np.zeros(omega.shape[0]), omega)

        def crossings(theta: float) -> FloatArray:
            return g_level_crossings(model, [0.0], 1.0 / theta)[0]

        nodes = np.linspace(-math.pi, math.pi, nw)
        return cls(nodes, evaluator(nodes)[0], even=True, evaluator=evaluator, crossings=crossings)

    @property
    def lower(self) -> float:
        """Lower end of the integration range."""
        return 0.0 if self.even else -math.pi

    def evaluate(self, omega: npt.ArrayLike) -> FloatArray:
        """Return ``S`` at ``omega``; 2-D input keeps its shape."""
        omega = np.asarray(omega, dtype=float)
        if self.evaluator is not None:
            return self.evaluator(omega).reshape(omega.shape)
        if self.even and self.omega_nodes[0] >= 0:
            omega = np.abs(omega)
        return np.interp(omega, self.omega_nodes, self.values)

    def _table_edges(self, level: int) -> FloatArray:
        inner = self.omega_nodes[(self.omega_nodes > self.lower) & (self.omega_nodes < math.pi)]
        if self.even:
            inner = np.unique(np.abs(inner))
        breaks = np.concatenate([[self.lower], inner, [math.pi]])
        steps = 2**level
        fine = breaks[:-1, None] + np.diff(breaks)[:, None] * (np.arange(steps) / steps)
        return np.append(fine.ravel(), math.pi)

    def _kinks(self, edges: FloatArray, theta: float | None) -> FloatArray:
        if theta is None:
            return np.empty(0)
        if self.evaluator is not None:
            return self.crossings(theta) if self.crossings is not None else np.empty(0)
        s = self.evaluate(edges)
        left, right = s[:-1] - theta, s[1:] - theta
        cross = np.flatnonzero(left * right < 0)
        return edges[cross] + (edges[cross + 1] - edges[cross]) * left[cross] / (left[cross] - right[cross])

    def rule(self, quad: QuadConfig, level: int, theta: float | None = None) -> tuple[FloatArray, FloatArray]:
        """
        Frequency nodes and mean-value weights, shape ``(1, q)``, with panels cut where ``S = theta``.

        Tabulated spectra use the table breakpoints as panel edges; evaluated ones use the same uniform
        panels as the surface rules.
        """
        if self.evaluator is None:
            edges = self._table_edges(level)
        else:
            panels = quad.omega_panels * 2**level * (1 if self.even else 2)
            edges = np.linspace(self.lower, math.pi, panels + 1)
        splits = kink_splits(edges, np.atleast_2d(self._kinks(edges, theta)))
        return split_rule(edges, splits, quad.nodes_per_panel)

    def mean(self, quad: QuadConfig, level: int, integrand: Integrand, theta: float | None = None) -> list[float]:
        """Mean over frequency of several functions of ``S``."""
        omega, weights = self.rule(quad, level, theta)
        return [float(_row_means(values, weights)[0]) for values in integrand(self.evaluate(omega))]


def stationary_rd_point(psd: PsdGrid, theta: float, quad: QuadConfig | None = None) -> RdPoint:
    """
    Evaluate ``D = (1/2pi) int min[theta, S]`` and ``R = (1/2pi) int max[0, 1/2 log(S/theta)]``.

    Args:
        psd (PsdGrid): Power spectral density.
        theta (float): Water level, > 0.
        quad (QuadConfig | None): Quadrature layout (w panels and stopping rule are used).

    Returns
    -------
        RdPoint: The converged point.
    """
    _check_theta(theta)
    quad = quad or QuadConfig.from_config()

    def integrand(s: FloatArray) -> tuple[FloatArray, FloatArray]:
        with np.errstate(divide="ignore"):
            return np.minimum(theta, s), 0.5 * np.maximum(0.0, np.log(s / theta))

    result = refine(lambda level: psd.mean(quad, level, integrand, theta), quad, scales=(0.0, RATE_SCALE))
    result.raise_if_failed()
    return RdPoint(theta=theta, distortion=result.values[0], rate=result.values[1], error_estimate=max(result.errors))


def log_spectrum_mean(psd: PsdGrid, quad: QuadConfig | None = None) -> float:
    """Return ``(1/2pi) int log S(w) dw``; equals ``log sigma^2`` for a stable AR spectrum."""
    quad = quad or QuadConfig.from_config()
    result = refine(lambda level: psd.mean(quad, level, lambda s: (np.log(s),)), quad, scales=(1.0,))
    result.raise_if_failed()
    return result.values[0]
