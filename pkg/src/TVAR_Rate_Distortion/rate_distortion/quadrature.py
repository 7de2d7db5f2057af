"""Composite Gauss-Legendre rules with uniform panel doubling."""

import dataclasses
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import lru_cache
from typing import Any

import numpy as np

from TVAR_Rate_Distortion.errors import ConvergenceError, DomainError
from TVAR_Rate_Distortion.model.tvar_model import FloatArray
from TVAR_Rate_Distortion.utils import load_area_config

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadConfig:
    """Panel layout and stopping rule for the (r, omega) quadrature."""

    r_panels: int = 16
    omega_panels: int = 32
    nodes_per_panel: int = 4
    refine_tol: float = 1.0e-6
    max_refinements: int = 6
    workers: int = 4

    def __post_init__(self) -> None:
        """Reject non-positive layouts and tolerances outside (0, 1)."""
        counts = (self.r_panels, self.omega_panels, self.nodes_per_panel, self.max_refinements, self.workers)
        if min(counts) < 1:
            msg = f"Quadrature counts must be positive: {self}"
            raise DomainError(msg)
        if not 0.0 < self.refine_tol < 1.0:
            msg = f"refine_tol must lie in (0, 1), got {self.refine_tol}"
            raise DomainError(msg)

    @classmethod
    def from_config(cls, **overrides: Any) -> "QuadConfig":
        """Build from the quadrature config; ``None`` overrides are ignored."""
        config = load_area_config("quadrature")
        fields = {f.name for f in dataclasses.fields(cls)}
        values = {k: v for k, v in config.items() if k in fields}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def doubled(self) -> "QuadConfig":
        """Return the layout with twice as many panels in each direction."""
        return dataclasses.replace(self, r_panels=2 * self.r_panels, omega_panels=2 * self.omega_panels)

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-ready dictionary."""
        return dataclasses.asdict(self)


@lru_cache(maxsize=64)
def average_rule(a: float, b: float, panels: int, nodes: int) -> tuple[FloatArray, FloatArray]:
    """
    Composite Gauss-Legendre rule for the mean value over ``[a, b]``.

    Args:
        a (float): Left end.
        b (float): Right end.
        panels (int): Number of equal panels.
        nodes (int): Gauss-Legendre nodes per panel.

    Returns
    -------
        tuple: Read-only ``(x, w)`` with ``sum(w) == 1`` up to rounding.
    """
    ref_x, ref_w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * ref_x[None, :]).ravel()
    w = (half[:, None] * ref_w[None, :]).ravel() / (b - a)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


@dataclass(frozen=True)
class QuadResult:
    """Converged (or last) estimates of several integrals evaluated together."""

    values: tuple[float, ...]
    previous: tuple[float, ...]
    level: int
    converged: bool

    @property
    def errors(self) -> tuple[float, ...]:
        """Change between the last two levels, used as the error estimate."""
        return tuple(abs(v - p) for v, p in zip(self.values, self.previous, strict=True))

    def raise_if_failed(self) -> None:
        """Raise ``ConvergenceError`` when the refinement budget ran out."""
        if not self.converged:
            raise ConvergenceError(self.previous[0], self.values[0], self.level)


def refine(
    estimate: Callable[[int], Sequence[float]],
    config: QuadConfig,
    scales: Sequence[float] | None = None,
) -> QuadResult:
    """
    Double every panel count until successive estimates agree.

    Each estimate ``i`` is accepted when ``|E_l - E_{l-1}| <= refine_tol * max(|E_l|, scales[i])``;
    a non-zero scale turns the test absolute for values below it.

    Args:
        estimate (Callable): Maps a refinement level (panel multiplier ``2**level``) to the estimates.
        config (QuadConfig): Stopping rule.
        scales (Sequence[float] | None): Per-estimate absolute floors; zeros by default.

    Returns
    -------
        QuadResult: Estimates of the finest level visited, with ``|E_l - E_{l-1}|`` as error estimate.
    """
    current = np.asarray(estimate(0), dtype=float)
    floor = np.zeros_like(current) if scales is None else np.asarray(scales, dtype=float)
    previous = current
    for level in range(1, config.max_refinements + 1):
        previous, current = current, np.asarray(estimate(level), dtype=float)
        diff = np.abs(current - previous)
        logger.debug("Refinement level %d: estimates %s, changes %s", level, current, diff)
        if np.all(diff <= config.refine_tol * np.maximum(np.abs(current), floor)):
            return QuadResult(tuple(current.tolist()), tuple(previous.tolist()), level, converged=True)
    logger.warning("Quadrature not converged after %d refinements: last estimates %s, %s", config.max_refinements, previous, current)
    return QuadResult(tuple(current.tolist()), tuple(previous.tolist()), config.max_refinements, converged=False)


def kink_splits(edges: FloatArray, kinks: FloatArray) -> FloatArray:
    """
    Choose one cut per panel and row: the first kink strictly inside the panel, else the panel midpoint.

    Further kinks in the same panel stay inside a sub-panel; they are separated only once panel
    doubling puts them in different panels, so their contribution converges at the uniform rate.

    Args:
        edges (np.ndarray): Shared panel edges, shape ``(P + 1,)``.
        kinks (np.ndarray): Kink abscissae per row, shape ``(rows, K)``, NaN-padded.

    Returns
    -------
        np.ndarray: Cut points of shape ``(rows, P)``.
    """
    kinks = np.atleast_2d(kinks)
    panels = edges.size - 1
    splits = np.broadcast_to(0.5 * (edges[:-1] + edges[1:]), (kinks.shape[0], panels)).copy()
    taken = np.zeros(splits.shape, dtype=bool)
    for column in kinks.T:
        finite = np.isfinite(column)
        idx = np.clip(np.searchsorted(edges, np.where(finite, column, edges[0]), side="right") - 1, 0, panels - 1)
        inside = finite & (column > edges[idx]) & (column < edges[idx + 1])
        rows = np.flatnonzero(inside)
        cols = idx[rows]
        free = ~taken[rows, cols]
        splits[rows[free], cols[free]] = column[rows[free]]
        taken[rows[free], cols[free]] = True
    return splits


def split_rule(edges: FloatArray, splits: FloatArray, nodes: int) -> tuple[FloatArray, FloatArray]:
    """
    Mean-value rule over ``[edges[0], edges[-1]]`` with every panel cut in two at ``splits``.

    Args:
        edges (np.ndarray): Panel edges, shape ``(P + 1,)``.
        splits (np.ndarray): Cut points, shape ``(rows, P)``, each inside its panel.
        nodes (int): Gauss-Legendre nodes per sub-panel.

    Returns
    -------
        tuple: ``(x, w)`` of shape ``(rows, 2 * P * nodes)``; each row of ``w`` sums to 1.
    """
    ref_x, ref_w = np.polynomial.legendre.leggauss(nodes)
    left = np.broadcast_to(edges[:-1], splits.shape)
    right = np.broadcast_to(edges[1:], splits.shape)
    lo = np.stack([left, splits], axis=-1)
    hi = np.stack([splits, right], axis=-1)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    rows = splits.shape[0]
    x = (mid[..., None] + half[..., None] * ref_x).reshape(rows, -1)
    w = (half[..., None] * ref_w).reshape(rows, -1) / (edges[-1] - edges[0])
    return x, w
