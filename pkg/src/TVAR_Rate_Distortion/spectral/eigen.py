"""Symmetric band eigenvalue computation."""

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from TVAR_Rate_Distortion.errors import InputError
from TVAR_Rate_Distortion.matrices.band_matrices import SymBandMatrix
from TVAR_Rate_Distortion.model.tvar_model import FloatArray

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EigenSpectrum:
    """Ascending eigenvalues with solver diagnostics.

    ``residual`` is the nominal backward-error bound ``n * eps`` of the LAPACK symmetric drivers, relative to the
    matrix norm; it is set from n, not measured from the computed eigenpairs. ``trace_rel_err`` compares the
    eigenvalue sum with the matrix trace and is the measured check.
    """

    values: FloatArray
    residual: float
    trace_rel_err: float = 0.0

    @property
    def n(self) -> int:
        """Number of eigenvalues."""
        return int(self.values.size)

    def power_mean(self, k: float) -> float:
        """Return ``(1/N) sum alpha^k``."""
        if k == 0:
            return 1.0
        return math.fsum(self.values**k) / self.n

    def log_det(self) -> float:
        """Sum of log eigenvalues."""
        return math.fsum(np.log(self.values))

    def inverse_mean(self) -> float:
        """Return ``(1/N) sum 1/alpha``: the per-letter variance of the source."""
        return math.fsum(1.0 / self.values) / self.n


def eigenvalues(matrix: SymBandMatrix) -> EigenSpectrum:
    """
    Compute all eigenvalues of a symmetric band matrix.

    Diagonal and tridiagonal inputs go to dedicated drivers; wider bands use LAPACK's band reduction.

    Args:
        matrix (SymBandMatrix): Symmetric input in lower band storage.

    Returns
    -------
        EigenSpectrum: Sorted eigenvalues and diagnostics.
    """
    if not np.all(np.isfinite(matrix.band)):
        msg = "Matrix has non-finite entries"
        raise InputError(msg)
    width = min(matrix.bandwidth, matrix.n - 1)
    band = matrix.band[: width + 1, :]
    if width == 0:
        values = np.sort(band[0])
    elif width == 1:
        values = scipy.linalg.eigvalsh_tridiagonal(band[0], band[1, :-1])
    else:
        values = scipy.linalg.eigvals_banded(band, lower=True)
    values = np.sort(np.asarray(values, dtype=float))

    trace = matrix.trace()
    trace_rel_err = abs(math.fsum(values) - trace) / max(abs(trace), np.finfo(float).tiny)
    residual = matrix.n * float(np.finfo(float).eps)
    logger.debug("Eigenvalues of %dx%d band (M=%d): [%.6g, %.6g], trace error %.2e", matrix.n, matrix.n, width, values[0], values[-1], trace_rel_err)
    return EigenSpectrum(values=values, residual=residual, trace_rel_err=trace_rel_err)
