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

"""Small-sigma coefficient extraction.

Every fit only uses sigmas where the truncated trace is trustworthy: the
omitted tail of the free trace must stay below `tail_relative` times K0(sigma).
Grids violating this are rejected, never trimmed.
"""

import itertools
import logging
import math
import statistics
from collections.abc import Callable
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

# pylint: disable=import-error
import numpy as np
from scipy.optimize import brentq

from . import aux
from . import heat
from .default import DEFAULT_DEGREES
from .default import DEFAULT_WINDOWS
from .default import POINTS_PER_DECADE
from .default import TOLERANCES
from .errors import ConfigError
from .errors import WindowError
from .linalg import FitReport
from .linalg import polyfit_weighted
from .operators import DeformationConfig
from .operators import SpectralBlock
from .operators import assemble_blocks
from .operators import operator_blocks

# pylint: enable=import-error

logger = logging.getLogger(__name__)

ORDER_NOISE_MARGIN = 100.0  # remainders must exceed this multiple of the noise floor


@dataclass(frozen=True)
class ExtrapolationResult:
    """sigma -> 0 limit aggregated over fit windows and degrees.

    Attributes:
        limit (float): Median of the fitted intercepts.
        uncertainty (float): Spread (max - min) of the intercepts.
        windows_used (tuple): The (sigma_lo, sigma_hi) windows fitted.
        converged (bool): Whether the relative spread is within the threshold.
        components (tuple): Per-truncation (N, limit, uncertainty), when several
            truncations were combined.
    """

    limit: float
    uncertainty: float
    windows_used: tuple[tuple[float, float], ...]
    converged: bool
    components: tuple[tuple[int, float, float], ...] = ()

    def as_dict(self) -> dict:
        return {
            "limit": self.limit,
            "uncertainty": self.uncertainty,
            "windows_used": [list(w) for w in self.windows_used],
            "converged": self.converged,
            "components": [
                {"N": n, "limit": lim, "uncertainty": unc} for n, lim, unc in self.components
            ],
        }


@dataclass(frozen=True)
class OrderEstimate:  # pylint: disable=too-many-instance-attributes
    """Empirical gamma-orders from a halving of gamma.

    p1 belongs to K_gamma - K0, p2 to the remainder after subtracting the
    corrections through order gamma^4. Both are raw log2 ratios.
    """

    sigma: float
    gamma: float
    p1: float
    p2: float
    differences: tuple[float, float]
    remainders: tuple[float, float]
    noise_floor: float
    p1_inconclusive: bool
    p2_inconclusive: bool

    def as_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "gamma": self.gamma,
            "p1": self.p1,
            "p2": self.p2,
            "differences": list(self.differences),
            "remainders": list(self.remainders),
            "noise_floor": self.noise_floor,
            "p1_inconclusive": self.p1_inconclusive,
            "p2_inconclusive": self.p2_inconclusive,
        }


@dataclass(frozen=True)
class CoefficientShift:
    """Heat-coefficient analogues A0, A2 of Q_gamma and the gamma^4-scaled shift of A2."""

    gamma: float
    a0: float
    a2: float
    a2_shift: float | None = None

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "A0": self.a0,
            "A2": self.a2,
            "A2_shift_over_g4": self.a2_shift,
        }


def satisfies_window_rule(
    n_trunc: int, sigma: float, tol: float = TOLERANCES["tail_relative"]
) -> bool:
    """tail_bound(N, sigma) <= tol * K0(sigma)."""
    return heat.tail_bound(n_trunc, sigma) <= tol * heat.heat_trace_free(n_trunc, sigma)


def check_window(
    n_trunc: int, sigmas: Sequence[float], tol: float = TOLERANCES["tail_relative"]
) -> None:
    """Reject sigma values violating the valid-window rule.

    Raises:
        WindowError: Listing every offending sigma.
    """
    offending = [float(s) for s in sigmas if not satisfies_window_rule(n_trunc, s, tol)]
    if offending:
        shown = ", ".join(f"{s:.6g}" for s in offending[:8])
        more = f" (+{len(offending) - 8} more)" if len(offending) > 8 else ""
        raise WindowError(
            f"ERROR: {len(offending)} sigma value(s) violate the tail rule at N={n_trunc}:"
            f" {shown}{more}. Increase sigma or N.",
            offending,
        )


def min_valid_sigma(n_trunc: int, tol: float = TOLERANCES["tail_relative"]) -> float:
    """Smallest sigma satisfying the valid-window rule at truncation N."""

    def excess(sigma: float) -> float:
        return math.log(heat.tail_bound(n_trunc, sigma)) - math.log(
            tol * heat.heat_trace_free(n_trunc, sigma)
        )

    scale = float(n_trunc * n_trunc)
    hi = 25.0 / scale
    while excess(hi) > 0:
        hi *= 2.0
        if hi * scale > 700.0:
            raise WindowError(f"ERROR: No sigma satisfies the tail rule at N={n_trunc}!", [])
    return brentq(excess, 1e-3 / scale, hi, xtol=1e-14, rtol=1e-12)


def min_valid_truncation(
    sigma: float, n_max: int, tol: float = TOLERANCES["tail_relative"]
) -> int:
    """Smallest N <= n_max at which sigma obeys the valid-window rule.

    The rule is monotone in N, so the search bisects.

    Raises:
        WindowError: If sigma violates the rule even at n_max.
    """
    if not satisfies_window_rule(n_max, sigma, tol):
        raise WindowError(
            f"ERROR: sigma={sigma:.6g} violates the tail rule at N={n_max}."
            " Increase sigma or N.",
            [float(sigma)],
        )
    lo, hi = 0, n_max
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if satisfies_window_rule(mid, sigma, tol):
            hi = mid
        else:
            lo = mid
    return hi


def valid_windows(
    n_trunc: int,
    windows: Sequence[Sequence[float]] = DEFAULT_WINDOWS,
    tol: float = TOLERANCES["tail_relative"],
) -> list[tuple[float, float]]:
    """Windows moved up in sigma (keeping their ratio) until they obey the tail rule at N."""
    sigma_star = min_valid_sigma(n_trunc, tol) * (1.0 + 1e-6)
    shifted = []
    for lo, hi in windows:
        factor = max(1.0, sigma_star / lo)
        shifted.append((lo * factor, hi * factor))
    return shifted


def windowed_series(series_fct, windows, points_per_decade: int = POINTS_PER_DECADE):
    """Evaluate a series builder on a log grid spanning all windows, end points included."""
    lo = min(w[0] for w in windows)
    hi = max(w[1] for w in windows)
    grid = heat.sigma_grid(lo, hi, points_per_decade)
    # pin the window end points on the grid
    grid = np.unique(np.concatenate([grid, np.array(windows, dtype=float).ravel()]))
    return series_fct(grid)


def _fit_piece(job) -> FitReport:
    piece, degree = job
    return polyfit_weighted(piece.sigma_grid, piece.values, degree)


def fit_heat_coefficients(
    series: heat.HeatSeries, degree: int, tol: float = TOLERANCES["tail_relative"]
) -> FitReport:
    """Fit sigma K(sigma) = c0 + c1 sigma + ... over the whole series.

    The heat-coefficient analogues in two dimensions are A_{2m} = 4 pi c_m.

    Raises:
        WindowError: If a grid point violates the valid-window rule.
    """
    if series.label not in (heat.SeriesLabel.K0, heat.SeriesLabel.KGAMMA):
        raise ConfigError(f"ERROR: Heat coefficients need a trace series, got {series.label}!")
    check_window(series.truncation, series.sigma_grid, tol)
    return polyfit_weighted(series.sigma_grid, series.sigma_grid * series.values, degree)


def seeley_dewitt(coefficients: Sequence[float]) -> list[float]:
    """A_{2m} = 4 pi c_m from the coefficients of a fit of sigma K."""
    return [4.0 * math.pi * c for c in coefficients]


def extrapolate_sigma_zero(
    series: heat.HeatSeries,
    degrees: Sequence[int] = DEFAULT_DEGREES,
    windows: Sequence[Sequence[float]] = DEFAULT_WINDOWS,
    threshold: float = TOLERANCES["extrapolation_spread"],
    tol: float = TOLERANCES["tail_relative"],
) -> ExtrapolationResult:
    """sigma -> 0 limit of a series from polynomial fits on several windows.

    Args:
        series (HeatSeries): The quantity whose limit is wanted.
        degrees (Sequence[int]): Fit degrees.
        windows (Sequence): At least two (sigma_lo, sigma_hi) windows.
        threshold (float): Relative spread accepted for convergence.
        tol (float): Tail tolerance of the valid-window rule.

    Returns:
        ExtrapolationResult: Median intercept and spread.

    Raises:
        ConfigError: With fewer than two windows.
        WindowError: If a window contains sigmas violating the tail rule.
    """
    windows = [(float(lo), float(hi)) for lo, hi in windows]
    if len(windows) < 2:
        raise ConfigError(f"ERROR: At least two fit windows needed, got {len(windows)}!")
    if not degrees:
        raise ConfigError("ERROR: No fit degrees given!")

    pieces = []
    for lo, hi in windows:
        piece = series.restrict(lo, hi)
        check_window(series.truncation, piece.sigma_grid, tol)
        pieces.append(piece)

    jobs = list(itertools.product(pieces, degrees))
    with ThreadPoolExecutor(max_workers=aux.thread_count()) as executor:
        fits = list(executor.map(_fit_piece, jobs))

    intercepts = [fit.intercept for fit in fits]
    limit = float(statistics.median(intercepts))
    uncertainty = float(max(intercepts) - min(intercepts))
    converged = uncertainty <= threshold * abs(limit)
    logger.debug(
        "%s at N=%d: limit %.10g spread %.3e over %d fits",
        series.label.value,
        series.truncation,
        limit,
        uncertainty,
        len(fits),
    )
    if not converged:
        logger.warning(
            "Extrapolation of %s not converged: spread %.3e vs limit %.6g",
            series.label.value,
            uncertainty,
            limit,
        )

    return ExtrapolationResult(
        limit=limit, uncertainty=uncertainty, windows_used=tuple(windows), converged=converged
    )


def estimate_CW1W1(  # pylint: disable=invalid-name,too-many-arguments
    cfgs: Sequence[DeformationConfig],
    windows: Sequence[Sequence[float]] = DEFAULT_WINDOWS,
    degrees: Sequence[int] = DEFAULT_DEGREES,
    points_per_decade: int = POINTS_PER_DECADE,
    blocks_factory: Callable[[DeformationConfig], Sequence[SpectralBlock]] = operator_blocks,
) -> ExtrapolationResult:
    """Coefficient of the leading gamma^4 sigma term of Delta2b, stabilised in N.

    For every truncation, Delta2b / (gamma^4 sigma) is extrapolated to sigma -> 0.
    The reported limit is the one at the largest N; the uncertainty combines the
    cross-N spread with the per-N fit spreads.

    Args:
        cfgs (Sequence[DeformationConfig]): At least two configurations differing in N,
            all with gamma > 0.
        windows (Sequence): Fit windows, valid at every N.
        degrees (Sequence[int]): Fit degrees.
        points_per_decade (int): Grid density inside the windows.
        blocks_factory (Callable): Builds the blocks of a configuration.

    Returns:
        ExtrapolationResult: With per-N components.
    """
    if len({cfg.N for cfg in cfgs}) < 2:
        raise ConfigError("ERROR: estimate_CW1W1 needs at least two distinct truncations!")
    for cfg in cfgs:
        if cfg.gamma <= 0:
            raise ConfigError(f"ERROR: estimate_CW1W1 needs gamma > 0, got {cfg.gamma}!")

    components = []
    per_n = []
    for cfg in sorted(cfgs, key=lambda c: c.N):
        blocks = blocks_factory(cfg)

        def scaled(grid, blocks=blocks, gamma=cfg.gamma, n_trunc=cfg.N):
            values = [heat.delta2b(blocks, s, gamma) / (gamma**4 * s) for s in grid]
            return heat.HeatSeries(
                sigma_grid=grid,
                values=np.array(values),
                tail_bounds=np.array([heat.tail_bound(n_trunc, s) for s in grid]),
                label=heat.SeriesLabel.CW1W1,
                truncation=n_trunc,
            )

        series = windowed_series(scaled, windows, points_per_decade)
        result = extrapolate_sigma_zero(
            series,
            degrees,
            windows,
            threshold=cfg.tol.extrapolation_spread,
            tol=cfg.tol.tail_relative,
        )
        logger.info("C_W1W1 at N=%d: %.10g +- %.2e", cfg.N, result.limit, result.uncertainty)
        components.append((cfg.N, result.limit, result.uncertainty))
        per_n.append(result)

    limits = [c[1] for c in components]
    limit = limits[-1]
    cross_spread = max(limits) - min(limits)
    uncertainty = max(cross_spread, max(r.uncertainty for r in per_n))
    threshold = cfgs[0].tol.cw1w1_spread
    converged = all(r.converged for r in per_n) and cross_spread <= threshold * abs(limit)

    return ExtrapolationResult(
        limit=limit,
        uncertainty=uncertainty,
        windows_used=per_n[-1].windows_used,
        converged=converged,
        components=tuple(components),
    )


def noise_floor(blocks: Sequence[SpectralBlock], sigma: float, tol: float) -> float:
    """Roundoff level of a computed K_gamma(sigma).

    Eigenvalue errors of order tol * ||Q|| enter the trace weighted by sigma exp(-sigma nu).
    """
    q_norm = max(float(np.max(np.abs(b.eigenvalues))) for b in blocks if b.size)
    return tol * q_norm * sigma * heat.heat_trace_deformed(blocks, sigma)


def _log2_ratio(full: float, half: float) -> float:
    if full == 0 or half == 0 or (full > 0) != (half > 0):
        return math.nan
    return math.log2(full / half)


def gamma_order_check(
    sigma: float,
    gamma: float,
    cfg: DeformationConfig,
    blocks_factory: Callable[[DeformationConfig], Sequence[SpectralBlock]] = assemble_blocks,
) -> OrderEstimate:
    """Empirical gamma-orders of K_gamma - K0 and of the order-gamma^4 remainder.

    Compares gamma with gamma/2. Estimates whose smaller value is within
    ORDER_NOISE_MARGIN times the noise floor are flagged inconclusive.

    Args:
        sigma (float): Heat time.
        gamma (float): Larger coupling.
        cfg (DeformationConfig): Truncation, datum and tolerances (its gamma is ignored).
        blocks_factory (Callable): Builds diagonalised blocks of a configuration.

    Returns:
        OrderEstimate: p1 (expected about 4) and p2 (at least 6).
    """
    # K0 from the gamma = 0 blocks, summed exactly like K_gamma
    k0 = heat.heat_trace_deformed(blocks_factory(cfg.with_gamma(0.0)), sigma)
    differences = []
    remainders = []
    floors = []
    for g in (gamma, gamma / 2):
        blocks = blocks_factory(cfg.with_gamma(g))
        k_gamma = heat.heat_trace_deformed(blocks, sigma)
        diff = k_gamma - k0
        corrections = aux.fsum(
            (
                heat.delta1(blocks, sigma, g),
                heat.delta2a(blocks, sigma, g),
                heat.delta2b(blocks, sigma, g),
            )
        )
        differences.append(diff)
        remainders.append(diff - corrections)
        floors.append(noise_floor(blocks, sigma, cfg.tol.noise_floor))

    floor = max(floors)
    p1 = _log2_ratio(*differences)
    p2 = _log2_ratio(*remainders)
    p1_bad = math.isnan(p1) or min(abs(d) for d in differences) < ORDER_NOISE_MARGIN * floor
    p2_bad = math.isnan(p2) or min(abs(r) for r in remainders) < ORDER_NOISE_MARGIN * floor
    logger.info(
        "Order check sigma=%g gamma=%g: p1=%.4f%s p2=%.4f%s (floor %.2e)",
        sigma,
        gamma,
        p1,
        " (inconclusive)" if p1_bad else "",
        p2,
        " (inconclusive)" if p2_bad else "",
        floor,
    )

    return OrderEstimate(
        sigma=sigma,
        gamma=gamma,
        p1=p1,
        p2=p2,
        differences=(differences[0], differences[1]),
        remainders=(remainders[0], remainders[1]),
        noise_floor=floor,
        p1_inconclusive=p1_bad,
        p2_inconclusive=p2_bad,
    )


def coefficient_shift(
    cfg: DeformationConfig,
    gammas: Sequence[float],
    windows: Sequence[Sequence[float]] = DEFAULT_WINDOWS,
    degrees: Sequence[int] = DEFAULT_DEGREES,
    points_per_decade: int = POINTS_PER_DECADE,
) -> list[CoefficientShift]:
    """A0 and A2 analogues of Q_gamma for gamma = 0 and every given gamma.

    The coefficients are the medians of sigma K_gamma fits over windows and degrees.
    The shift (A2(gamma) - A2(0))/gamma^4 is reported for gamma > 0.
    """
    results = []
    a2_free = None
    for gamma in [0.0] + [g for g in gammas if g > 0]:
        blocks = assemble_blocks(cfg.with_gamma(gamma))
        series = windowed_series(
            lambda grid, blocks=blocks: heat.kgamma_series(blocks, grid),
            windows,
            points_per_decade,
        )
        fits = [
            fit_heat_coefficients(series.restrict(lo, hi), degree, cfg.tol.tail_relative)
            for lo, hi in windows
            for degree in degrees
            if degree >= 1
        ]
        if not fits:
            raise ConfigError("ERROR: A2 needs at least one fit degree >= 1!")
        a0 = 4.0 * math.pi * statistics.median(fit.coefficients[0] for fit in fits)
        a2 = 4.0 * math.pi * statistics.median(fit.coefficients[1] for fit in fits)
        if gamma == 0:
            a2_free = a2
            results.append(CoefficientShift(gamma=gamma, a0=a0, a2=a2))
        else:
            results.append(
                CoefficientShift(gamma=gamma, a0=a0, a2=a2, a2_shift=(a2 - a2_free) / gamma**4)
            )
    return results
