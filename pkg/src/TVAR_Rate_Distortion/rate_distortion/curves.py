"""Rate-distortion points, curves and curve shape checks."""

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from TVAR_Rate_Distortion.model.tvar_model import FloatArray

NATS_PER_BIT = math.log(2.0)


@dataclass(frozen=True)
class RdPoint:
    """One point of a parametric curve; rate in nats per letter."""

    theta: float
    distortion: float
    rate: float
    error_estimate: float = 0.0
    converged: bool = True

    @property
    def rate_bits(self) -> float:
        """Rate in bits per letter."""
        return self.rate / NATS_PER_BIT


@dataclass(frozen=True)
class RdCurve:
    """Points sorted by distortion, the zero-rate distortion and a tag naming the method."""

    points: tuple[RdPoint, ...]
    d_max: float
    source_tag: str
    settings: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        """Sort the points by ascending distortion."""
        object.__setattr__(self, "points", tuple(sorted(self.points, key=lambda p: (p.distortion, p.theta))))

    @property
    def thetas(self) -> FloatArray:
        """Water-filling parameters."""
        return np.array([p.theta for p in self.points])

    @property
    def distortions(self) -> FloatArray:
        """Distortions, ascending."""
        return np.array([p.distortion for p in self.points])

    @property
    def rates(self) -> FloatArray:
        """Rates in nats."""
        return np.array([p.rate for p in self.points])

    @property
    def all_converged(self) -> bool:
        """True when no point carries a convergence annotation."""
        return all(p.converged for p in self.points)


@dataclass(frozen=True)
class ShapeReport:
    """Monotonicity and convexity findings for one curve."""

    monotone: bool
    convex: bool
    violations: tuple[str, ...]

    @property
    def passed(self) -> bool:
        """True when both checks hold."""
        return self.monotone and self.convex


def check_curve(curve: RdCurve, monotone_slack: float = 1e-12, convex_slack: float = 1e-9) -> ShapeReport:
    """
    Check that R strictly decreases in D until it reaches 0, and that R is midpoint-convex.

    Args:
        curve (RdCurve): Curve to check.
        monotone_slack (float): Allowed rate increase between neighbours.
        convex_slack (float): Allowed excess of the middle point over the chord of each consecutive triple.

    Returns
    -------
        ShapeReport: Findings with one message per violation.
    """
    d, r = curve.distortions, curve.rates
    order_issues = []
    chord_issues = []
    for i in range(len(r) - 1):
        if r[i] > monotone_slack and not r[i + 1] < r[i] + monotone_slack:
            order_issues.append(f"rate not decreasing between D={d[i]:.6g} and D={d[i + 1]:.6g}")
        elif r[i] <= monotone_slack and r[i + 1] > monotone_slack:
            order_issues.append(f"rate rises from 0 at D={d[i + 1]:.6g}")
    for i in range(1, len(r) - 1):
        span = d[i + 1] - d[i - 1]
        if span <= 0:
            continue
        chord = r[i - 1] + (r[i + 1] - r[i - 1]) * (d[i] - d[i - 1]) / span
        if r[i] > chord + convex_slack:
            chord_issues.append(f"curve above chord at D={d[i]:.6g} by {r[i] - chord:.3g}")
    return ShapeReport(monotone=not order_issues, convex=not chord_issues, violations=tuple(order_issues + chord_issues))


def count_increases(values: list[float] | FloatArray, slack: float = 1e-12) -> int:
    """Number of steps along a ladder where the value grows by more than ``slack``."""
    arr = np.asarray(values, dtype=float)
    return int(np.sum(np.diff(arr) > slack))
