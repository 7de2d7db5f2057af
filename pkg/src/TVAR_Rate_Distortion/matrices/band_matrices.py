"""Lower-triangular TVAR matrix, inverse autocorrelation matrix and covariance.

Index convention: public entry accessors take the 1-based ``(mu, nu)`` / ``(t, col)`` indices used for
the source equations. Band arrays are 0-based: ``band[m, j]`` stores the entry on the m-th
subdiagonal in column-aligned (lower) storage for the inverse covariance, ``G[j + m, j]``, and in
row-aligned storage for A, ``A[j, j - m]``.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from TVAR_Rate_Distortion.errors import DomainError
from TVAR_Rate_Distortion.model.tvar_model import FloatArray, TvarModel

logger = logging.getLogger(__name__)


def _check_dimension(n: int) -> None:
    if n < 1:
        msg = f"Matrix dimension must be >= 1, got {n}"
        raise DomainError(msg)


@dataclass(frozen=True)
class LowerBandMatrix:
    """The N x N lower-triangular matrix A with ``z = A x``; ``band[m, t] = A[t, t - m]`` (0-based)."""

    n: int
    bandwidth: int
    band: FloatArray

    def entry(self, t: int, col: int) -> float:
        """Return ``A[t, col]`` for 1-based indices."""
        if not (1 <= t <= self.n and 1 <= col <= self.n):
            msg = f"Index ({t}, {col}) out of range for n={self.n}"
            raise DomainError(msg)
        m = t - col
        if m < 0 or m > self.bandwidth:
            return 0.0
        return float(self.band[m, t - 1])

    def to_dense(self) -> FloatArray:
        """Return A as a dense array."""
        dense = np.zeros((self.n, self.n))
        for m in range(min(self.bandwidth, self.n - 1) + 1):
            rows = np.arange(m, self.n)
            dense[rows, rows - m] = self.band[m, m:]
        return dense

    def det(self) -> float:
        """Product of the diagonal."""
        return float(np.prod(self.band[0]))


@dataclass(frozen=True)
class SymBandMatrix:
    """Symmetric band matrix in lower storage: ``band[k, j] = G[j + k, j]`` (0-based)."""

    n: int
    bandwidth: int
    band: FloatArray
    scale: float = 1.0

    def entry(self, mu: int, nu: int) -> float:
        """Return ``G[mu, nu]`` for 1-based indices."""
        if not (1 <= mu <= self.n and 1 <= nu <= self.n):
            msg = f"Index ({mu}, {nu}) out of range for n={self.n}"
            raise DomainError(msg)
        k = abs(mu - nu)
        if k > self.bandwidth:
            return 0.0
        return float(self.band[k, min(mu, nu) - 1])

    def diagonal(self, k: int = 0) -> FloatArray:
        """Return the k-th diagonal (length ``n - |k|``)."""
        k = abs(k)
        if k > self.bandwidth:
            return np.zeros(max(self.n - k, 0))
        return self.band[k, : self.n - k].copy()

    def trace(self) -> float:
        """Sum of the main diagonal."""
        return math.fsum(self.band[0])

    def to_dense(self) -> FloatArray:
        """Return the matrix as a dense symmetric array."""
        dense = np.diag(self.band[0].copy())
        for k in range(1, min(self.bandwidth, self.n - 1) + 1):
            off = self.band[k, : self.n - k]
            dense += np.diag(off, -k) + np.diag(off, k)
        return dense


def build_A(model: TvarModel, n: int) -> LowerBandMatrix:
    """
    Build A: row t (1-based) holds ``a_m(t/n)`` at column ``t - m`` for ``0 <= m <= min(M, t - 1)``.

    Args:
        model (TvarModel): Source model.
        n (int): Dimension N.

    Returns
    -------
        LowerBandMatrix: Unit lower-triangular band matrix of bandwidth M.
    """
    _check_dimension(n)
    band = model.trajectories(np.arange(1, n + 1) / n)
    for m in range(1, model.order + 1):
        band[m, :m] = 0.0
    return LowerBandMatrix(n=n, bandwidth=model.order, band=band)


def build_phi_inv(model: TvarModel, n: int) -> SymBandMatrix:
    """
    Build the inverse autocorrelation matrix ``(1/sigma^2) A^T A`` in band storage.

    Args:
        model (TvarModel): Source model.
        n (int): Dimension N.

    Returns
    -------
        SymBandMatrix: Symmetric positive definite, bandwidth M.
    """
    lower = build_A(model, n).band
    order = model.order
    band = np.zeros((order + 1, n))
    for k in range(order + 1):
        for m in range(order - k + 1):
            # Row t of A contributes A[t, t-m] * A[t, t-m-k] to G[t-m, t-m-k].
            t = np.arange(k + m, n)
            band[k, t - k - m] += lower[m, t] * lower[m + k, t]
    scale = 1.0 / model.noise_variance
    return SymBandMatrix(n=n, bandwidth=order, band=band * scale, scale=scale)


def entry_phi_inv(model: TvarModel, n: int, mu: int, nu: int) -> float:
    """
    Closed-form entry ``(1/sigma^2) sum_{m=0}^{N-max} a_m((m+max)/N) a_{m+|mu-nu|}((m+max)/N)``.

    Args:
        model (TvarModel): Source model.
        n (int): Dimension N.
        mu (int): 1-based row index.
        nu (int): 1-based column index.

    Returns
    -------
        float: The entry; exactly 0 when ``|mu - nu| > M``.
    """
    if not (1 <= mu <= n and 1 <= nu <= n):
        msg = f"Index ({mu}, {nu}) out of range for n={n}"
        raise DomainError(msg)
    k = abs(mu - nu)
    if k > model.order:
        return 0.0
    top = max(mu, nu)
    # Terms with m + k > M vanish, so the truncated sum stops at min(N - max, M - k).
    m = np.arange(min(n - top, model.order - k) + 1)
    a = model.trajectories((m + top) / n)
    return math.fsum(a[m, m] * a[m + k, m]) / model.noise_variance


def build_phi(model: TvarModel, n: int) -> FloatArray:
    """
    Build the covariance ``sigma^2 (A^T A)^{-1}`` with two unit-triangular solves against A.

    Args:
        model (TvarModel): Source model.
        n (int): Dimension N; dense storage, intended for a few thousand at most.

    Returns
    -------
        np.ndarray: Dense symmetric positive definite covariance.
    """
    a_dense = build_A(model, n).to_dense()
    identity = np.eye(n)
    a_inv_t = scipy.linalg.solve_triangular(a_dense, identity, trans="T", lower=True, unit_diagonal=True)
    phi = model.noise_variance * scipy.linalg.solve_triangular(a_dense, a_inv_t, lower=True, unit_diagonal=True)
    return (phi + phi.T) / 2.0
