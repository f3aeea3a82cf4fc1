#
# Copyright (c) 2026 BerniK86.
#
# This file is part of lindblad-heat-trace
# (see https://github.com/rbi-mtm/lindblad-heat-trace).
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program. If not, see <http://www.gnu.org/licenses/>.
#

"""Numerical kernels: dense symmetric eigendecomposition and weighted polynomial fits."""

import logging
from dataclasses import dataclass

# pylint: disable=import-error
import numpy as np
import scipy.linalg as sla
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as npoly

from .default import FIT_DEGREE_CAP
from .default import TOLERANCES
from .errors import ConfigError
from .errors import NumericalError

# pylint: enable=import-error

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenvalues in ascending order and orthonormal eigenvectors (as columns)."""

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class FitReport:
    """Result of a weighted polynomial fit.

    Attributes:
        coefficients (tuple[float, ...]): Coefficients in ascending powers of x.
        window (tuple[float, float, int]): (x_lo, x_hi, number of points).
        residual_rms (float): Weighted root-mean-square residual.
        condition_estimate (float): 2-norm condition number of the scaled design matrix.
    """

    coefficients: tuple[float, ...]
    window: tuple[float, float, int]
    residual_rms: float
    condition_estimate: float

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def intercept(self) -> float:
        return self.coefficients[0]

    def predict(self, xs) -> np.ndarray:
        """Evaluate the fitted polynomial."""
        return npoly.polyval(np.asarray(xs, dtype=float), self.coefficients)


def eigh_symmetric(matrix, tol_eig: float = TOLERANCES["eig_residual"]) -> EigenDecomposition:
    """Eigendecomposition of a dense real symmetric matrix (LAPACK via scipy).

    Args:
        matrix (array_like): Square matrix, exactly symmetric.
        tol_eig (float): Relative Frobenius residual accepted.

    Returns:
        EigenDecomposition: Ascending eigenvalues and orthonormal eigenvectors.

    Raises:
        ConfigError: If the matrix is not square or not symmetric.
        NumericalError: If the driver fails or the residual check does not hold.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigError(f"ERROR: Expected a square matrix, got shape {a.shape}!")
    if not np.array_equal(a, a.T):
        raise ConfigError(f"ERROR: Matrix of size {a.shape[0]} is not symmetric!")
    size = a.shape[0]
    if size == 0:
        return EigenDecomposition(values=np.zeros(0), vectors=np.zeros((0, 0)))

    try:
        values, vectors = sla.eigh(a, check_finite=True)
    except (sla.LinAlgError, ValueError) as exc:
        raise NumericalError(f"ERROR: Eigensolver failed for matrix of size {size}") from exc

    residual = float(np.linalg.norm(a @ vectors - vectors * values))
    scale = float(np.linalg.norm(a))
    if residual > tol_eig * scale:
        raise NumericalError(
            f"ERROR: Eigensolver did not converge for matrix of size {size}"
            f" (residual {residual:.3e}, norm {scale:.3e})"
        )
    ortho = float(np.max(np.abs(vectors.T @ vectors - np.eye(size))))
    if ortho > TOLERANCES["orthonormality"]:
        raise NumericalError(
            f"ERROR: Eigenvectors of matrix of size {size} not orthonormal (deviation {ortho:.3e})"
        )

    return EigenDecomposition(values=values, vectors=vectors)


def polyfit_weighted(xs, ys, degree: int, weights=None) -> FitReport:
    """Weighted least-squares polynomial fit through a QR factorisation.

    The abscissae are mapped to [-1, 1] before the factorisation; coefficients are
    converted back to plain powers of x.

    Args:
        xs (array_like): Distinct abscissae.
        ys (array_like): Ordinates.
        degree (int): Polynomial degree, 0 <= degree <= FIT_DEGREE_CAP.
        weights (array_like, optional): Positive weights. Defaults to ones.

    Returns:
        FitReport: Coefficients, window, residual and conditioning.

    Raises:
        ConfigError: On inconsistent input.
        NumericalError: If the design matrix is rank deficient.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    w = np.ones_like(xs) if weights is None else np.asarray(weights, dtype=float)

    if not 0 <= degree <= FIT_DEGREE_CAP:
        raise ConfigError(f"ERROR: Fit degree must be in [0, {FIT_DEGREE_CAP}], got {degree}!")
    if not len(xs) == len(ys) == len(w):
        raise ConfigError(
            f"ERROR: Length mismatch: xs={len(xs)}, ys={len(ys)}, weights={len(w)}!"
        )
    if len(xs) < degree + 1:
        raise ConfigError(f"ERROR: {len(xs)} points cannot determine a degree {degree} fit!")
    if len(np.unique(xs)) != len(xs):
        raise ConfigError("ERROR: Fit abscissae must be distinct!")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ConfigError("ERROR: Fit weights must be positive and finite!")
    if not np.all(np.isfinite(ys)):
        raise NumericalError("ERROR: Non-finite ordinates passed to fit!")

    lo, hi = float(xs.min()), float(xs.max())
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo) if hi > lo else 1.0
    t = (xs - center) / half

    sw = np.sqrt(w)
    design = np.vander(t, degree + 1, increasing=True) * sw[:, None]
    q, r = np.linalg.qr(design)
    diag = np.abs(np.diag(r))
    if diag.min() <= len(xs) * np.finfo(float).eps * diag.max():
        raise NumericalError(f"ERROR: Rank-deficient design matrix for degree {degree} fit!")
    scaled = sla.solve_triangular(r, q.T @ (sw * ys))

    resid = design @ scaled - sw * ys
    residual_rms = float(np.sqrt(np.sum(resid * resid) / np.sum(w)))
    condition = float(np.linalg.cond(r))

    coefficients = Polynomial(scaled, domain=[center - half, center + half]).convert().coef
    coefficients = np.pad(coefficients, (0, degree + 1 - len(coefficients)))
    logger.debug("degree %d fit on [%g, %g]: rms %.3e cond %.3e", degree, lo, hi,
                 residual_rms, condition)

    return FitReport(
        coefficients=tuple(float(c) for c in coefficients),
        window=(lo, hi, len(xs)),
        residual_rms=residual_rms,
        condition_estimate=condition,
    )
