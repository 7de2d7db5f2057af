"""Monte-Carlo simulation of TVAR sample paths.

Innovations come from ``numpy.random.default_rng(seed)`` (PCG64 bit generator, ziggurat Gaussian
transform via ``Generator.standard_normal``). They are drawn as one ``(num_paths, n)`` block in
row-major order, so path ``i`` always consumes the same stream segment for a given seed.
"""

import logging
from dataclasses import dataclass

import numpy as np

from TVAR_Rate_Distortion.errors import DomainError
from TVAR_Rate_Distortion.model.tvar_model import FloatArray, TvarModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SamplePaths:
    """Realized paths ``x_1..x_N``, one row per path."""

    n: int
    paths: FloatArray
    seed: int | None = None

    @property
    def num_paths(self) -> int:
        """Number of simulated paths."""
        return int(self.paths.shape[0])


def simulate_from_innovations(model: TvarModel, innovations: FloatArray) -> FloatArray:
    """
    Run the TVAR recursion with zero initial state on given innovations.

    Args:
        model (TvarModel): Source model.
        innovations (np.ndarray): Shape ``(num_paths, n)``; row ``i`` drives path ``i``.

    Returns
    -------
        np.ndarray: Paths of the same shape.
    """
    z = np.atleast_2d(np.asarray(innovations, dtype=float))
    n = z.shape[1]
    a = model.trajectories(np.arange(1, n + 1) / n)
    x = np.zeros_like(z)
    for t in range(n):
        acc = z[:, t].copy()
        for m in range(1, min(model.order, t) + 1):
            acc -= a[m, t] * x[:, t - m]
        x[:, t] = acc
    return x


def simulate(model: TvarModel, n: int, num_paths: int, seed: int) -> SamplePaths:
    """
    Draw ``num_paths`` independent paths of length ``n``.

    Args:
        model (TvarModel): Source model.
        n (int): Path length N.
        num_paths (int): Number of paths.
        seed (int): Seed for the innovation generator.

    Returns
    -------
        SamplePaths: Deterministic given ``(model, n, num_paths, seed)``.
    """
    if n < 1 or num_paths < 1:
        msg = f"n and num_paths must be >= 1, got n={n}, num_paths={num_paths}"
        raise DomainError(msg)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((num_paths, n)) * np.sqrt(model.noise_variance)
    logger.debug("Simulating %d paths of length %d (seed %d)", num_paths, n, seed)
    return SamplePaths(n=n, paths=simulate_from_innovations(model, z), seed=seed)
