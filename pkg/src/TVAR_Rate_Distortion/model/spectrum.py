"""Sampled inverse-spectrum surface and model validation."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from TVAR_Rate_Distortion.errors import DomainError
from TVAR_Rate_Distortion.model.tvar_model import FloatArray, TvarModel, g_surface, g_upper_bound
from TVAR_Rate_Distortion.utils import load_area_config

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectrumGrid:
    """Values of ``g(r, omega)`` on a tensor grid with cached extrema."""

    r_nodes: FloatArray
    omega_nodes: FloatArray
    values: FloatArray
    g_min: float = field(init=False)
    g_max: float = field(init=False)
    argmin: tuple[float, float] = field(init=False)
    argmax: tuple[float, float] = field(init=False)

    def __post_init__(self) -> None:
        """Cache the grid extrema and where they are attained."""
        i_min = np.unravel_index(np.argmin(self.values), self.values.shape)
        i_max = np.unravel_index(np.argmax(self.values), self.values.shape)
        object.__setattr__(self, "g_min", float(self.values[i_min]))
        object.__setattr__(self, "g_max", float(self.values[i_max]))
        object.__setattr__(self, "argmin", (float(self.r_nodes[i_min[0]]), float(self.omega_nodes[i_min[1]])))
        object.__setattr__(self, "argmax", (float(self.r_nodes[i_max[0]]), float(self.omega_nodes[i_max[1]])))

    def triples(self) -> FloatArray:
        """Return ``(r, omega, g)`` rows in r-major order."""
        rr, ww = np.meshgrid(self.r_nodes, self.omega_nodes, indexing="ij")
        return np.column_stack([rr.ravel(), ww.ravel(), self.values.ravel()])


def sample_spectrum(model: TvarModel, nr: int | None = None, nw: int | None = None) -> SpectrumGrid:
    """
    Sample ``g`` on uniform grids ``r in [0, 1]`` and ``omega in [-pi, pi]``.

    Args:
        model (TvarModel): Source model.
        nr (int | None): Number of r nodes; defaults to the spectrum config.
        nw (int | None): Number of omega nodes; defaults to the spectrum config. Odd counts include omega = 0.

    Returns
    -------
        SpectrumGrid: The sampled surface.
    """
    if nr is None or nw is None:
        config = load_area_config("spectrum")
        nr = nr or int(config["nr"])
        nw = nw or int(config["nw"])
    if nr < 2 or nw < 2:
        msg = f"Spectrum grid needs at least 2x2 nodes, got {nr}x{nw}"
        raise DomainError(msg)
    r_nodes = np.linspace(0.0, 1.0, nr)
    omega_nodes = np.linspace(-math.pi, math.pi, nw)
    grid = SpectrumGrid(r_nodes, omega_nodes, g_surface(model, r_nodes, omega_nodes))
    logger.debug("Sampled g on %dx%d grid: min %.6g at %s, max %.6g", nr, nw, grid.g_min, grid.argmin, grid.g_max)
    return grid


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the boundedness check on ``g``."""

    is_valid: bool
    g_inf: float
    g_sup: float
    bound: float
    g_floor: float
    argmin: tuple[float, float]
    feedback: str

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-ready dictionary."""
        return {
            "is_valid": self.is_valid,
            "g_inf": self.g_inf,
            "g_sup": self.g_sup,
            "bound": self.bound,
            "g_floor": self.g_floor,
            "argmin": list(self.argmin),
            "feedback": self.feedback,
        }


class ModelValidator:
    """Check that a model's inverse spectrum stays away from zero on the validation grid."""

    def __init__(self, nr: int | None = None, nw: int | None = None, g_floor: float | None = None):
        """
        Initialize the validator from the spectrum config.

        Args:
            nr (int | None): r resolution of the validation grid.
            nw (int | None): omega resolution of the validation grid.
            g_floor (float | None): Smallest admissible grid infimum of g.
        """
        self.config = load_area_config("spectrum")
        self.nr = nr or int(self.config["nr"])
        self.nw = nw or int(self.config["nw"])
        self.g_floor = float(self.config["g_floor"]) if g_floor is None else g_floor
        if self.g_floor < 0:
            msg = f"g_floor must be >= 0, got {self.g_floor}"
            raise DomainError(msg)

    def validate(self, model: TvarModel) -> ValidationReport:
        """
        Validate a model for the asymptotic path.

        Args:
            model (TvarModel): Source model.

        Returns
        -------
            ValidationReport: Pass/fail with the grid estimates of inf g, sup g and the pointwise bound.
        """
        grid = sample_spectrum(model, self.nr, self.nw)
        bound = float(g_upper_bound(model, grid.r_nodes).max())
        is_valid = grid.g_min >= self.g_floor
        if is_valid:
            feedback = f"inf g = {grid.g_min:.6g} >= floor {self.g_floor:.3g}"
            logger.info("Model '%s' valid: inf g %.6g, sup g %.6g (bound %.6g)", model.name, grid.g_min, grid.g_max, bound)
        else:
            feedback = f"inf g = {grid.g_min:.6g} below floor {self.g_floor:.3g} at (r, omega) = ({grid.argmin[0]:.4g}, {grid.argmin[1]:.4g}); d_max is unbounded"
            logger.warning("Model '%s' rejected: %s", model.name, feedback)
        return ValidationReport(
            is_valid=is_valid,
            g_inf=grid.g_min,
            g_sup=grid.g_max,
            bound=bound,
            g_floor=self.g_floor,
            argmin=grid.argmin,
            feedback=feedback,
        )


def validate(model: TvarModel, g_floor: float | None = None) -> ValidationReport:
    """Validate ``model`` against ``g_floor`` on the default grid."""
    return ModelValidator(g_floor=g_floor).validate(model)
