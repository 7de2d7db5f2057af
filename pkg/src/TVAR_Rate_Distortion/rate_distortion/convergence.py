"""Convergence of finite-N rates to the asymptotic curve along a block-length ladder."""

import logging
from dataclasses import dataclass
from typing import Any

from TVAR_Rate_Distortion.model.tvar_model import TvarModel
from TVAR_Rate_Distortion.rate_distortion.asymptotic_rd import AsymptoticRateDistortion
from TVAR_Rate_Distortion.rate_distortion.curves import count_increases
from TVAR_Rate_Distortion.rate_distortion.finite_rd import FiniteRateDistortion
from TVAR_Rate_Distortion.rate_distortion.quadrature import QuadConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConvergenceRow:
    """Finite-N and asymptotic rates at one (N, D) pair."""

    n: int
    distortion: float
    finite_rate: float
    asymptotic_rate: float

    @property
    def gap(self) -> float:
        """Absolute rate gap in nats."""
        return abs(self.finite_rate - self.asymptotic_rate)

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-ready dictionary."""
        return {"n": self.n, "distortion": self.distortion, "finite_rate": self.finite_rate, "asymptotic_rate": self.asymptotic_rate, "gap": self.gap}


@dataclass(frozen=True)
class ConvergenceStudy:
    """All rows of a study plus the per-distortion ladder verdicts."""

    rows: tuple[ConvergenceRow, ...]
    n_list: tuple[int, ...]
    distortions: tuple[float, ...]
    max_increases: int = 1
    monotone_slack: float = 1e-12

    def gaps(self, distortion: float) -> list[float]:
        """Gaps at ``distortion`` in ladder order."""
        return [row.gap for row in self.rows if row.distortion == distortion]

    def increases(self, distortion: float) -> int:
        """Number of ladder steps where the gap grows."""
        return count_increases(self.gaps(distortion), self.monotone_slack)

    @property
    def monotone(self) -> bool:
        """True when every ladder has at most ``max_increases`` growing steps."""
        return all(self.increases(d) <= self.max_increases for d in self.distortions)

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-ready dictionary."""
        return {
            "n_list": list(self.n_list),
            "distortions": list(self.distortions),
            "monotone": self.monotone,
            "increases": {format(d, "g"): self.increases(d) for d in self.distortions},
            "rows": [row.to_dict() for row in self.rows],
        }


def convergence_study(
    model: TvarModel,
    n_list: list[int] | tuple[int, ...],
    distortions: list[float] | tuple[float, ...],
    quad: QuadConfig | None = None,
    monotone_slack: float = 1e-12,
) -> ConvergenceStudy:
    """
    Tabulate ``|R_N(D) - R(D)|`` over a block-length ladder.

    Args:
        model (TvarModel): Source model; must pass validation.
        n_list (list[int]): Increasing block lengths.
        distortions (list[float]): Target distortions, each within every finite ``d_max``.
        quad (QuadConfig | None): Quadrature layout for the asymptotic rates.
        monotone_slack (float): Gap growth tolerated before a step counts as non-monotone.

    Returns
    -------
        ConvergenceStudy: Rows in ``(n, distortion)`` order.
    """
    asymptotic = AsymptoticRateDistortion(model, quad)
    limits = {d: asymptotic.rate_at_distortion(d).rate for d in distortions}
    rows = []
    for n in n_list:
        finite = FiniteRateDistortion(model, n)
        for d in distortions:
            rows.append(ConvergenceRow(n=n, distortion=d, finite_rate=finite.rate_at_distortion(d).rate, asymptotic_rate=limits[d]))
    study = ConvergenceStudy(rows=tuple(rows), n_list=tuple(n_list), distortions=tuple(distortions), monotone_slack=monotone_slack)
    for d in distortions:
        gaps = study.gaps(d)
        logger.info("Gap ladder at D=%g: %s", d, ", ".join(f"{g:.3e}" for g in gaps))
        if study.increases(d) > study.max_increases:
            logger.warning("Gap at D=%g grows on %d steps of the N ladder", d, study.increases(d))
    return study
