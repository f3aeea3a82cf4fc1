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

"""Heat traces, Duhamel corrections through order gamma^4 and the spectral dimension.

All traces are finite sums over the truncated spectrum. Reductions run in a fixed
order (ascending m, then ascending basis index) with exactly rounded sums.
"""

import enum
import functools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

# pylint: disable=import-error
import numpy as np

from . import aux
from .default import PHI2_SWITCH
from .default import PHI2_TERMS
from .default import POINTS_PER_DECADE
from .errors import ConfigError
from .errors import NumericalError
from .operators import DeformationConfig
from .operators import ScalarDatum
from .operators import SpectralBlock
from .operators import operator_blocks

# pylint: enable=import-error

logger = logging.getLogger(__name__)

EXP_OVERFLOW = 700.0

# Taylor coefficients 1/(k+2)! of phi2, highest power first for Horner
_PHI2_SERIES = tuple(1.0 / math.factorial(k + 2) for k in reversed(range(PHI2_TERMS)))


class SeriesLabel(str, enum.Enum):
    """What a HeatSeries holds."""

    K0 = "K0"
    KGAMMA = "Kgamma"
    DELTA1 = "Delta1"
    DELTA2A = "Delta2a"
    DELTA2B = "Delta2b"
    DSEFF = "dseff"
    W2_MOMENT = "sigma_tr_W2"
    W1_SQUARE = "sigma_tr_W1sq"
    CW1W1 = "CW1W1"


@dataclass(frozen=True, eq=False)
class HeatSeries:
    """Values of one trace-like quantity on an ascending sigma grid.

    Attributes:
        sigma_grid (np.ndarray): Ascending positive sigmas.
        values (np.ndarray): Finite values.
        tail_bounds (np.ndarray): Bound on the omitted K0 tail at each sigma.
        label (SeriesLabel): Quantity held.
        truncation (int): Truncation N the values were computed at.
    """

    sigma_grid: np.ndarray
    values: np.ndarray
    tail_bounds: np.ndarray
    label: SeriesLabel
    truncation: int

    def __post_init__(self):
        sigma = np.asarray(self.sigma_grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        tails = np.asarray(self.tail_bounds, dtype=float)
        if not len(sigma) == len(values) == len(tails):
            raise ConfigError(
                f"ERROR: Series {self.label} has {len(sigma)} sigmas, {len(values)} values"
                f" and {len(tails)} tail bounds!"
            )
        if np.any(sigma <= 0) or np.any(np.diff(sigma) <= 0):
            raise ConfigError(f"ERROR: Sigma grid of {self.label} must be positive and ascending!")
        if not np.all(np.isfinite(values)):
            raise NumericalError(f"ERROR: Non-finite values in series {self.label}!")
        if np.any(tails < 0):
            raise ConfigError(f"ERROR: Negative tail bound in series {self.label}!")
        for name, arr in (("sigma_grid", sigma), ("values", values), ("tail_bounds", tails)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.sigma_grid)

    def restrict(self, sigma_lo: float, sigma_hi: float) -> "HeatSeries":
        """Sub-series on sigma_lo <= sigma <= sigma_hi."""
        mask = (self.sigma_grid >= sigma_lo) & (self.sigma_grid <= sigma_hi)
        return HeatSeries(
            sigma_grid=self.sigma_grid[mask],
            values=self.values[mask],
            tail_bounds=self.tail_bounds[mask],
            label=self.label,
            truncation=self.truncation,
        )


def sigma_grid(sigma_min: float, sigma_max: float, points_per_decade: int = POINTS_PER_DECADE):
    """Default log-spaced sigma grid."""
    return aux.log_grid(sigma_min, sigma_max, points_per_decade)


def _check_sigma(sigma: float):
    if not sigma > 0 or not math.isfinite(sigma):
        raise ConfigError(f"ERROR: sigma must be positive and finite, got {sigma}!")


def heat_trace_free(n_trunc: int, sigma: float) -> float:
    """Truncated free trace sum_{n=1}^{N} 4n exp(-sigma n^2)."""
    _check_sigma(sigma)
    n = np.arange(1, n_trunc + 1, dtype=float)
    return aux.fsum(4.0 * n * np.exp(-sigma * n * n))


def tail_bound(n_trunc: int, sigma: float) -> float:
    """Upper bound on the omitted tail sum_{n>N} 4n exp(-sigma n^2)."""
    _check_sigma(sigma)
    n1 = n_trunc + 1.0
    return 2.0 * math.exp(-sigma * n_trunc**2) / sigma + 4.0 * n1 * math.exp(-sigma * n1 * n1)


def free_spectrum(n_trunc: int) -> np.ndarray:
    """Truncated spectrum of D^2: n^2 with multiplicity 4n, n = 1..N, ascending."""
    n = np.arange(1, n_trunc + 1)
    return np.repeat((n * n).astype(float), 4 * n)


def _phi2_series(z: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(z)
    for coef in _PHI2_SERIES:
        acc = acc * z + coef
    return acc


def phi2_array(z) -> np.ndarray:
    """Vectorised phi2(z) = (e^z - 1 - z)/z^2."""
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ConfigError("ERROR: phi2 called with a non-finite argument!")
    if np.any(z > EXP_OVERFLOW):
        raise NumericalError(f"ERROR: phi2 overflow for z={float(np.max(z)):g}!")
    small = np.abs(z) < PHI2_SWITCH
    zs = np.where(small, 1.0, z)
    direct = (np.expm1(zs) - zs) / (zs * zs)
    return np.where(small, _phi2_series(z), direct)


def phi2(z: float) -> float:
    """Second divided difference of the exponential at (0, 0, z).

    Uses the Taylor series below |z| = PHI2_SWITCH.
    """
    return float(phi2_array(z))


def _chi_array(w: np.ndarray) -> np.ndarray:
    """exp(-w) phi2(w) for w >= 0, evaluated without forming exp(w)."""
    small = w < PHI2_SWITCH
    ws = np.where(small, 1.0, w)
    direct = (-np.expm1(-ws) - ws * np.exp(-ws)) / (ws * ws)
    return np.where(small, np.exp(-w) * _phi2_series(w), direct)


def duhamel_kernel(mu_a, mu_b, sigma: float) -> np.ndarray:
    """Vectorised duhamel_F over arrays of eigenvalue pairs at one sigma."""
    _check_sigma(sigma)
    mu_a = np.asarray(mu_a, dtype=float)
    mu_b = np.asarray(mu_b, dtype=float)
    z = -sigma * (mu_b - mu_a)
    down = z <= 0
    # z <= 0: sigma^2 e^{-sigma mu_a} phi2(z); z > 0: rewritten around e^{-sigma mu_b}
    neg = sigma * sigma * np.exp(-sigma * mu_a) * phi2_array(np.where(down, z, 0.0))
    pos = sigma * sigma * np.exp(-sigma * mu_b) * _chi_array(np.where(down, 0.0, z))
    return np.where(down, neg, pos)


def duhamel_F(mu_a: float, mu_b: float, sigma: float) -> float:  # pylint: disable=invalid-name
    """Duhamel double integral int_0^sigma int_0^s e^{-(sigma-s+r) mu_a} e^{-(s-r) mu_b} dr ds.

    Args:
        mu_a (float): Eigenvalue attached to the outer propagators.
        mu_b (float): Eigenvalue attached to the inner propagator.
        sigma (float): Heat time (> 0).

    Returns:
        float: sigma^2 exp(-sigma mu_a) phi2(-sigma (mu_b - mu_a)), always >= 0.
    """
    return float(duhamel_kernel(mu_a, mu_b, sigma))


def _block_gamma(blocks: Sequence[SpectralBlock], gamma: float | None) -> float:
    if not blocks:
        raise ConfigError("ERROR: No spectral blocks given!")
    if gamma is None:
        return blocks[0].gamma
    if gamma < 0 or not math.isfinite(gamma):
        raise ConfigError(f"ERROR: gamma must be finite and >= 0, got {gamma}!")
    return float(gamma)


def truncation_of(blocks: Sequence[SpectralBlock]) -> int:
    """Truncation N of a full set of blocks (there are 2N azimuthal blocks)."""
    return len(blocks) // 2


def trace_w1_exp(blocks: Sequence[SpectralBlock], sigma: float) -> float:
    """Tr(W1 exp(-sigma D^2))."""
    _check_sigma(sigma)
    return aux.fsum(
        aux.fsum(np.diag(b.w1) * np.exp(-sigma * b.d2_diag)) for b in blocks
    )


def trace_w2_exp(blocks: Sequence[SpectralBlock], sigma: float) -> float:
    """Tr(W2 exp(-sigma D^2))."""
    _check_sigma(sigma)
    return aux.fsum(
        aux.fsum(np.diag(b.w2) * np.exp(-sigma * b.d2_diag)) for b in blocks
    )


def trace_w1sq_exp(blocks: Sequence[SpectralBlock], sigma: float) -> float:
    """Tr(W1^2 exp(-sigma D^2)) = sum_ab (W1)_ab^2 exp(-sigma mu_a)."""
    _check_sigma(sigma)
    return aux.fsum(
        aux.fsum(np.sum(b.w1 * b.w1, axis=1) * np.exp(-sigma * b.d2_diag)) for b in blocks
    )


def delta1(blocks: Sequence[SpectralBlock], sigma: float, gamma: float | None = None) -> float:
    """First Duhamel correction -gamma^2 sigma Tr(W1 exp(-sigma D^2)).

    Measured, not assumed: the diagonal of W1 is summed as it is stored.
    """
    gamma = _block_gamma(blocks, gamma)
    return -(gamma**2) * sigma * trace_w1_exp(blocks, sigma)


def delta2a(blocks: Sequence[SpectralBlock], sigma: float, gamma: float | None = None) -> float:
    """Direct first-order insertion of W2: -gamma^4 sigma Tr(W2 exp(-sigma D^2))."""
    gamma = _block_gamma(blocks, gamma)
    return -(gamma**4) * sigma * trace_w2_exp(blocks, sigma)


def _w1_duhamel_sum(block: SpectralBlock, sigma: float) -> float:
    rows, cols = np.nonzero(block.w1)
    if len(rows) == 0:
        return 0.0
    entries = block.w1[rows, cols]
    kernel = duhamel_kernel(block.d2_diag[rows], block.d2_diag[cols], sigma)
    return aux.fsum(entries * entries * kernel)


def delta2b(blocks: Sequence[SpectralBlock], sigma: float, gamma: float | None = None) -> float:
    """Quadratic Duhamel term gamma^4 sum_ab (W1)_ab^2 F(mu_a, mu_b, sigma), always >= 0."""
    gamma = _block_gamma(blocks, gamma)
    _check_sigma(sigma)
    return gamma**4 * aux.fsum(_w1_duhamel_sum(b, sigma) for b in blocks)


def spectrum_of(blocks: Sequence[SpectralBlock]) -> np.ndarray:
    """Eigenvalues of all blocks, concatenated in ascending m."""
    return np.concatenate([b.eigenvalues for b in blocks])


def heat_trace_deformed(
    blocks: Sequence[SpectralBlock], sigma: float, gamma: float | None = None
) -> float:
    """K_gamma(sigma) = sum over all block eigenvalues nu of exp(-sigma nu)."""
    if gamma is not None and not math.isclose(gamma, _block_gamma(blocks, None)):
        raise ConfigError(
            f"ERROR: Blocks were assembled at gamma={blocks[0].gamma}, requested {gamma}!"
        )
    _check_sigma(sigma)
    return aux.fsum(aux.fsum(np.exp(-sigma * b.eigenvalues)) for b in blocks)


def _eigenvalues(source) -> np.ndarray:
    if isinstance(source, (int, np.integer)) and not isinstance(source, bool):
        return free_spectrum(int(source))
    if isinstance(source, np.ndarray):
        return source
    return spectrum_of(source)


def dseff(source, sigma: float) -> float:
    """Effective spectral dimension 2 sigma <nu> = -2 d log K / d log sigma.

    Args:
        source: Truncation N (free spectrum), a sequence of SpectralBlock, or an
            array of eigenvalues.
        sigma (float): Heat time (> 0).

    Returns:
        float: 2 sigma sum(nu e^{-sigma nu}) / sum(e^{-sigma nu}).
    """
    _check_sigma(sigma)
    nu = _eigenvalues(source)
    if len(nu) == 0:
        raise ConfigError("ERROR: Empty spectrum!")
    weights = np.exp(-sigma * (nu - nu.min()))
    return 2.0 * sigma * aux.fsum(nu * weights) / aux.fsum(weights)


@functools.lru_cache(maxsize=16)
def w2_diagonal(n_trunc: int, f: ScalarDatum) -> tuple[np.ndarray, np.ndarray]:
    """(mu_a, (W2)_aa) over all blocks in ascending m."""
    cfg = DeformationConfig(N=n_trunc, gamma=0.0, f=f)
    blocks = operator_blocks(cfg)
    mu = np.concatenate([b.d2_diag for b in blocks])
    diag = np.concatenate([np.diag(b.w2) for b in blocks])
    mu.setflags(write=False)
    diag.setflags(write=False)
    return mu, diag


def dseff_w2_projection(n_trunc: int, sigma: float, gamma: float, f: ScalarDatum) -> float:
    """W2-sector shift of the spectral dimension.

    Spectral dimension of the surrogate trace K0 + Delta2a (no Delta2b), minus the free
    one. Derivatives are taken analytically.
    """
    _check_sigma(sigma)
    if gamma == 0:
        return 0.0
    n = np.arange(1, n_trunc + 1, dtype=float)
    e_free = 4.0 * n * np.exp(-sigma * n * n)
    k0 = aux.fsum(e_free)
    dk0 = -aux.fsum(e_free * n * n)

    mu, w_diag = w2_diagonal(n_trunc, f)
    e_w2 = w_diag * np.exp(-sigma * mu)
    g4 = gamma**4
    d2a = -g4 * sigma * aux.fsum(e_w2)
    dd2a = -g4 * aux.fsum(e_w2 * (1.0 - sigma * mu))

    surrogate = -2.0 * sigma * (dk0 + dd2a) / (k0 + d2a)
    free = -2.0 * sigma * dk0 / k0
    return surrogate - free


def _series(label, n_trunc: int, grid, fct) -> HeatSeries:
    grid = np.asarray(grid, dtype=float)
    return HeatSeries(
        sigma_grid=grid,
        values=np.array([fct(s) for s in grid]),
        tail_bounds=np.array([tail_bound(n_trunc, s) for s in grid]),
        label=label,
        truncation=n_trunc,
    )


def k0_series(n_trunc: int, grid) -> HeatSeries:
    """K0 on a grid."""
    return _series(SeriesLabel.K0, n_trunc, grid, lambda s: heat_trace_free(n_trunc, s))


def kgamma_series(blocks: Sequence[SpectralBlock], grid) -> HeatSeries:
    n_trunc = truncation_of(blocks)
    return _series(SeriesLabel.KGAMMA, n_trunc, grid, lambda s: heat_trace_deformed(blocks, s))


def correction_series(blocks: Sequence[SpectralBlock], grid, label: SeriesLabel) -> HeatSeries:
    """Delta1, Delta2a or Delta2b on a grid, at the blocks' gamma."""
    fcts = {
        SeriesLabel.DELTA1: delta1,
        SeriesLabel.DELTA2A: delta2a,
        SeriesLabel.DELTA2B: delta2b,
    }
    if label not in fcts:
        raise ConfigError(f"ERROR: {label} is not a correction term!")
    fct = fcts[label]
    return _series(label, truncation_of(blocks), grid, lambda s: fct(blocks, s))


def w2_moment_series(blocks: Sequence[SpectralBlock], grid) -> HeatSeries:
    """sigma Tr(W2 exp(-sigma D^2)), i.e. -Delta2a/gamma^4."""
    return _series(
        SeriesLabel.W2_MOMENT,
        truncation_of(blocks),
        grid,
        lambda s: s * trace_w2_exp(blocks, s),
    )


def w1_square_series(blocks: Sequence[SpectralBlock], grid) -> HeatSeries:
    """sigma Tr(W1^2 exp(-sigma D^2))."""
    return _series(
        SeriesLabel.W1_SQUARE,
        truncation_of(blocks),
        grid,
        lambda s: s * trace_w1sq_exp(blocks, s),
    )


def cw1w1_series(blocks: Sequence[SpectralBlock], grid) -> HeatSeries:
    """Delta2b / (gamma^4 sigma), evaluated at unit coupling so it is gamma-free."""
    return _series(
        SeriesLabel.CW1W1,
        truncation_of(blocks),
        grid,
        lambda s: delta2b(blocks, s, gamma=1.0) / s,
    )


def dseff_series(source, grid, n_trunc: int) -> HeatSeries:
    """Spectral dimension on a grid, for the free spectrum, blocks or an eigenvalue array."""
    nu = _eigenvalues(source)
    return _series(SeriesLabel.DSEFF, n_trunc, grid, lambda s: dseff(nu, s))
