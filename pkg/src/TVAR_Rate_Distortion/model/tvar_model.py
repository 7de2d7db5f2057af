"""Gaussian TVAR model with polynomial coefficient trajectories.

The model follows the difference equation ``x_t = -sum_{m=1}^{M} a_m(t/N) x_{t-m} + z_t`` with i.i.d.
``N(0, noise_variance)`` innovations and zero initial state. Each ``a_m(r)`` is a polynomial in the
normalized time ``r`` stored by ascending-degree coefficients; ``a_0(r) = 1`` is implicit.
"""

import dataclasses
import json
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from TVAR_Rate_Distortion.errors import DomainError, ModelConfigError
from TVAR_Rate_Distortion.utils import content_hash

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]


@dataclass(frozen=True)
class TvarModel:
    """Immutable description of an M-th order Gaussian TVAR source."""

    order: int
    coeffs: tuple[tuple[float, ...], ...]
    noise_variance: float
    name: str = ""

    def __post_init__(self) -> None:
        """Normalize coefficient containers and enforce the model invariants."""
        if isinstance(self.order, bool) or not isinstance(self.order, int) or self.order < 0:
            msg = f"order must be a non-negative integer, got {self.order!r}"
            raise ModelConfigError(msg)
        try:
            coeffs = tuple(tuple(float(c) for c in poly) for poly in self.coeffs)
            noise_variance = float(self.noise_variance)
        except (TypeError, ValueError) as e:
            msg = f"Non-numeric model field: {e}"
            raise ModelConfigError(msg) from e
        if len(coeffs) != self.order:
            msg = f"Expected {self.order} coefficient polynomials, got {len(coeffs)}"
            raise ModelConfigError(msg)
        if any(len(poly) == 0 for poly in coeffs):
            msg = "Every coefficient polynomial needs at least one term"
            raise ModelConfigError(msg)
        if not all(math.isfinite(c) for poly in coeffs for c in poly):
            msg = "Coefficient polynomials must have finite terms"
            raise ModelConfigError(msg)
        if not math.isfinite(noise_variance) or noise_variance <= 0:
            msg = f"noise_variance must be finite and > 0, got {self.noise_variance!r}"
            raise ModelConfigError(msg)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "noise_variance", noise_variance)
        object.__setattr__(self, "name", str(self.name))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TvarModel":
        """
        Build a model from its JSON document form.

        Args:
            data (dict): ``{"name", "order", "noise_variance", "coeffs"}`` where ``coeffs[m-1]`` lists the
                ascending-degree coefficients of ``a_m(r)``.

        Returns
        -------
            TvarModel: The validated model.
        """
        if not isinstance(data, dict):
            msg = "Model document must be a JSON object"
            raise ModelConfigError(msg)
        missing = {"order", "noise_variance", "coeffs"} - data.keys()
        if missing:
            msg = f"Model document is missing fields: {sorted(missing)}"
            raise ModelConfigError(msg)
        coeffs = data["coeffs"]
        if not isinstance(coeffs, list) or not all(isinstance(poly, list) for poly in coeffs):
            msg = "coeffs must be a list of coefficient lists"
            raise ModelConfigError(msg)
        return cls(order=data["order"], coeffs=coeffs, noise_variance=data["noise_variance"], name=data.get("name", ""))

    @classmethod
    def from_json(cls, path: str | Path) -> "TvarModel":
        """Load a model from a JSON file."""
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            msg = f"Cannot read model file {path}: {e}"
            raise ModelConfigError(msg) from e
        model = cls.from_dict(data)
        logger.info("Loaded model '%s' (order %d, degree %d) from %s", model.name, model.order, model.degree, path)
        return model

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON document form of the model."""
        return {
            "name": self.name,
            "order": self.order,
            "noise_variance": self.noise_variance,
            "coeffs": [list(poly) for poly in self.coeffs],
        }

    @cached_property
    def model_hash(self) -> str:
        """Content digest of the canonical JSON form."""
        return content_hash(self.to_dict())

    @cached_property
    def coeff_matrix(self) -> FloatArray:
        """Coefficient table of shape ``(M, P + 1)``, zero-padded to the largest degree."""
        width = self.degree + 1
        table = np.zeros((self.order, width))
        for m, poly in enumerate(self.coeffs):
            table[m, : len(poly)] = poly
        return table

    @property
    def degree(self) -> int:
        """Largest polynomial degree P over all trajectories (0 for white noise)."""
        return max((len(poly) - 1 for poly in self.coeffs), default=0)

    @property
    def is_constant(self) -> bool:
        """True when no coefficient depends on r, i.e. the source is a stationary AR process."""
        return bool(np.all(self.coeff_matrix[:, 1:] == 0.0))

    def scaled(self, factor: float) -> "TvarModel":
        """Return the same model with its innovation variance multiplied by ``factor``."""
        return dataclasses.replace(self, noise_variance=self.noise_variance * factor)

    def trajectories(self, r: npt.ArrayLike) -> FloatArray:
        """
        Evaluate ``a_0..a_M`` at the given normalized times without domain checks.

        Args:
            r (array_like): Normalized times.

        Returns
        -------
            np.ndarray: Shape ``(M + 1, len(r))``; row 0 is identically 1.
        """
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.ones((self.order + 1, r.size))
        if self.order:
            # polyval with a 2-D table evaluates every column of coefficients at once.
            out[1:] = np.polynomial.polynomial.polyval(r, self.coeff_matrix.T)
        return out


def _check_r(r: float) -> None:
    if not 0.0 <= r <= 1.0:
        msg = f"r must lie in [0, 1], got {r!r}"
        raise DomainError(msg)


def _check_omega(omega: float) -> None:
    if not -math.pi <= omega <= math.pi:
        msg = f"omega must lie in [-pi, pi], got {omega!r}"
        raise DomainError(msg)


def eval_coeff(model: TvarModel, m: int, r: float) -> float:
    """Return ``a_m(r)``: exactly 1 for ``m = 0`` and 0 beyond the model order."""
    if m < 0:
        msg = f"Coefficient index must be >= 0, got {m}"
        raise DomainError(msg)
    _check_r(r)
    if m == 0:
        return 1.0
    if m > model.order:
        return 0.0
    return float(np.polynomial.polynomial.polyval(r, model.coeffs[m - 1]))


def eval_gk(model: TvarModel, k: int, r: float) -> float:
    """
    Return the k-th diagonal coefficient ``g_k(r) = (1/sigma^2) sum_m a_m(r) a_{m+k}(r)``.

    ``g_{-k} = g_k``; the coefficients vanish for ``|k| > M``.
    """
    _check_r(r)
    k = abs(k)
    if k > model.order:
        return 0.0
    a = model.trajectories(r)[:, 0]
    return float(np.dot(a[: model.order + 1 - k], a[k:]) / model.noise_variance)


def finite_gk(model: TvarModel, n: int, k: int, mu: int) -> float:
    """
    Return the finite-N diagonal entry with the ``m/N`` offsets kept.

    ``(1/sigma^2) sum_{m=0}^{M} a_m((m+mu)/N) a_{m+k}((m+mu)/N)`` where ``mu = max(row, col)`` (1-based).
    Valid only for ``mu <= N - M`` where every evaluation point stays inside ``[0, 1]``.
    """
    k = abs(k)
    if not 1 <= mu <= n - model.order:
        msg = f"Row index {mu} outside the interior range [1, {n - model.order}]"
        raise DomainError(msg)
    if k > model.order:
        return 0.0
    r = (np.arange(model.order + 1 - k) + mu) / n
    a = model.trajectories(r)
    products = a[np.arange(r.size), np.arange(r.size)] * a[np.arange(r.size) + k, np.arange(r.size)]
    return math.fsum(products) / model.noise_variance


def g_surface(model: TvarModel, r: npt.ArrayLike, omega: npt.ArrayLike) -> FloatArray:
    """
    Evaluate ``g(r, omega) = (1/sigma^2)|1 + sum_m a_m(r) e^{-j m omega}|^2`` on a tensor grid.

    Args:
        model (TvarModel): Source model.
        r (array_like): Normalized times, shape ``(nr,)``.
        omega (array_like): Angular frequencies, shape ``(nw,)``.

    Returns
    -------
        np.ndarray: Shape ``(nr, nw)``, non-negative.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    a = model.trajectories(r)
    phases = np.exp(-1j * np.outer(np.arange(model.order + 1), omega))
    transfer = a.T @ phases
    return (transfer.real**2 + transfer.imag**2) / model.noise_variance


def eval_g(model: TvarModel, r: float, omega: float) -> float:
    """Return ``g(r, omega)`` at a single point of ``[0, 1] x [-pi, pi]``."""
    _check_r(r)
    _check_omega(omega)
    return float(g_surface(model, [r], [omega])[0, 0])


def g_upper_bound(model: TvarModel, r: npt.ArrayLike) -> FloatArray:
    """Return the pointwise bound ``(1/sigma^2)(sum_m |a_m(r)|)^2`` on ``g(r, .)``."""
    return np.abs(model.trajectories(r)).sum(axis=0) ** 2 / model.noise_variance


def g_rows(model: TvarModel, r: npt.ArrayLike, omega: npt.ArrayLike) -> FloatArray:
    """
    Evaluate ``g`` where each normalized time has its own frequency nodes.

    Args:
        model (TvarModel): Source model.
        r (array_like): Normalized times, shape ``(nr,)``.
        omega (array_like): Frequencies, shape ``(nr, q)``; row ``i`` belongs to ``r[i]``.

    Returns
    -------
        np.ndarray: Shape ``(nr, q)``.
    """
    a = model.trajectories(r)
    z = np.exp(-1j * np.atleast_2d(np.asarray(omega, dtype=float)))
    # Horner in e^{-j omega}.
    transfer = a[model.order][:, None] * np.ones_like(z)
    for m in range(model.order - 1, -1, -1):
        transfer = transfer * z + a[m][:, None]
    return (transfer.real**2 + transfer.imag**2) / model.noise_variance


def g_level_crossings(model: TvarModel, r: npt.ArrayLike, level: float) -> FloatArray:
    """
    Frequencies in ``(0, pi)`` where ``g(r, .)`` crosses ``level``.

    ``sigma^2 g(r, w) = c_0(r) + 2 sum_k c_k(r) cos(k w)`` with ``c_k = sum_m a_m a_{m+k}`` is a
    Chebyshev series in ``cos w``, so there are at most M crossings per normalized time.

    Args:
        model (TvarModel): Source model.
        r (array_like): Normalized times, shape ``(nr,)``.
        level (float): Level of g.

    Returns
    -------
        np.ndarray: Shape ``(nr, M)``, ascending per row and NaN-padded.
    """
    a = model.trajectories(r)
    order = model.order
    out = np.full((a.shape[1], order), np.nan)
    if order == 0:
        return out
    series = np.stack([(1.0 if k == 0 else 2.0) * np.sum(a[: order + 1 - k] * a[k:], axis=0) for k in range(order + 1)])
    series[0] -= level * model.noise_variance
    # Time-invariant stretches share one root solve.
    unique, inverse = np.unique(series, axis=1, return_inverse=True)
    for j in range(unique.shape[1]):
        roots = np.polynomial.chebyshev.chebroots(unique[:, j])
        real = roots.real[(np.abs(roots.imag) <= 1e-12) & (np.abs(roots.real) < 1.0)]
        omegas = np.sort(np.arccos(real))
        out[np.flatnonzero(inverse.ravel() == j), : omegas.size] = omegas
    return out
