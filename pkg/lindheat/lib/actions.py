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

"""Functions performing the work of the CLI commands.

Every command returns its results (polars DataFrames keyed by gamma, or a
JSON-ready dict); writing files is left to the caller.
"""

import logging
import math
import statistics
from collections.abc import Sequence
from typing import Any

# pylint: disable=import-error
import polars as pl

from . import asymptotics
from . import heat
from . import validation
from .default import TOLERANCES
from .default import dseff_schema
from .default import heat_schema
from .default import spectrum_schema
from .errors import ConfigError
from .errors import WindowError
from .io import RunConfig
from .linalg import FitReport
from .operators import assemble_blocks
from .operators import operator_blocks
from .operators import scalar_invariants

# pylint: enable=import-error

logger = logging.getLogger(__name__)

ORDER_CHECK_SIGMA = 0.1


def cmd_spectrum(config: RunConfig) -> dict[float, pl.DataFrame]:
    """Eigenvalues of every block, one table per gamma.

    Args:
        config (RunConfig): Run configuration.

    Returns:
        dict[float, pl.DataFrame]: Columns m, index, eigenvalue, gamma; rows sorted by
            m, then ascending eigenvalue.
    """
    tables = {}
    for gamma in config.gammas:
        blocks = assemble_blocks(config.deformation(gamma))
        data: dict[str, list] = {col: [] for col in spectrum_schema()}
        for block in blocks:
            for index, value in enumerate(block.eigenvalues):
                data["m"].append(block.m.value)
                data["index"].append(index)
                data["eigenvalue"].append(float(value))
                data["gamma"].append(gamma)
        tables[gamma] = pl.DataFrame(data, schema=spectrum_schema())
        logger.info("Spectrum at gamma=%g: %d eigenvalues", gamma, len(tables[gamma]))
    return tables


def cmd_heat(config: RunConfig) -> dict[float, pl.DataFrame]:
    """Heat traces and Duhamel corrections on the configured sigma grid, per gamma.

    The remainder column is K_gamma - K0 - Delta1 - Delta2a - Delta2b.
    """
    grid = config.grid()
    n_trunc = config.truncation_N
    k0 = [heat.heat_trace_free(n_trunc, s) for s in grid]
    tails = [heat.tail_bound(n_trunc, s) for s in grid]

    tables = {}
    for gamma in config.gammas:
        blocks = assemble_blocks(config.deformation(gamma))
        k_gamma = [heat.heat_trace_deformed(blocks, s) for s in grid]
        d1 = [heat.delta1(blocks, s) for s in grid]
        d2a = [heat.delta2a(blocks, s) for s in grid]
        d2b = [heat.delta2b(blocks, s) for s in grid]
        remainder = [
            math.fsum((kg, -k, -a, -b, -c)) for kg, k, a, b, c in zip(k_gamma, k0, d1, d2a, d2b)
        ]
        tables[gamma] = pl.DataFrame(
            {
                "sigma": grid,
                "K0": k0,
                "Kgamma": k_gamma,
                "delta1": d1,
                "delta2a": d2a,
                "delta2b": d2b,
                "remainder": remainder,
                "tail_bound": tails,
            },
            schema=heat_schema(),
        )
        logger.info("Heat traces at gamma=%g on %d sigmas", gamma, len(grid))
    return tables


def cmd_dseff(config: RunConfig) -> dict[float, pl.DataFrame]:
    """Spectral dimension of the free and deformed spectra and the W2 projection, per gamma."""
    grid = config.grid()
    n_trunc = config.truncation_N
    free = heat.dseff_series(n_trunc, grid, n_trunc)

    tables = {}
    for gamma in config.gammas:
        blocks = assemble_blocks(config.deformation(gamma))
        deformed = heat.dseff_series(blocks, grid, n_trunc)
        projection = [heat.dseff_w2_projection(n_trunc, s, gamma, config.f) for s in grid]
        tables[gamma] = pl.DataFrame(
            {
                "sigma": grid,
                "dseff_free": free.values,
                "dseff_gamma": deformed.values,
                "dseff_w2_projection": projection,
            },
            schema=dseff_schema(),
        )
    return tables


def _fit_dict(report: FitReport) -> dict[str, Any]:
    lo, hi, count = report.window
    return {
        "coefficients": list(report.coefficients),
        "window": {"sigma_lo": lo, "sigma_hi": hi, "count": count},
        "residual_rms": report.residual_rms,
        "condition_estimate": report.condition_estimate,
    }


def cw1w1_truncations(
    n_trunc: int, windows: Sequence[Sequence[float]], tol: float = TOLERANCES["tail_relative"]
) -> list[int]:
    """Truncations of the C_W1W1 convergence study, nominally 0.6 N, 0.8 N and N.

    The smallest truncation is raised until every configured window obeys the tail
    rule there. The windows themselves are never moved.

    Raises:
        WindowError: If no truncation below N admits the windows.
    """
    sigma_lo = min(float(lo) for lo, _ in windows)
    floor = asymptotics.min_valid_truncation(sigma_lo, n_trunc, tol)
    if floor >= n_trunc:
        raise WindowError(
            f"ERROR: C_W1W1 needs two truncations, but sigma={sigma_lo:.6g} obeys the tail"
            f" rule only from N={floor}. Raise the fit windows or truncation_N.",
            [sigma_lo],
        )
    low = max(1, round(0.6 * n_trunc), floor)
    return sorted({low, max(low, round(0.8 * n_trunc)), n_trunc})


def cmd_fit(config: RunConfig) -> dict[str, Any]:  # pylint: disable=too-many-locals
    """Small-sigma fits: heat coefficients, the W2 constant, the Clifford trace and C_W1W1.

    Returns:
        dict: JSON-ready report.
    """
    n_trunc = config.truncation_N
    tol = config.tolerances
    windows = config.windows
    ppd = config.points_per_decade
    positive = [g for g in config.gammas if g > 0]
    truncations = cw1w1_truncations(n_trunc, windows, tol.tail_relative) if positive else []

    k0 = asymptotics.windowed_series(lambda g: heat.k0_series(n_trunc, g), windows, ppd)
    fits = [
        asymptotics.fit_heat_coefficients(k0.restrict(lo, hi), degree, tol.tail_relative)
        for lo, hi in windows
        for degree in config.degrees
        if degree >= 1
    ]
    if not fits:
        raise ConfigError("ERROR: Heat coefficients need at least one fit degree >= 1!")
    c0 = statistics.median(fit.coefficients[0] for fit in fits)
    c1 = statistics.median(fit.coefficients[1] for fit in fits)
    a0, a2 = asymptotics.seeley_dewitt((c0, c1))

    quartic, gradient = scalar_invariants(config.f)
    free_blocks = operator_blocks(config.deformation(0.0))
    w2_limit = asymptotics.extrapolate_sigma_zero(
        asymptotics.windowed_series(lambda g: heat.w2_moment_series(free_blocks, g), windows, ppd),
        config.degrees,
        windows,
        threshold=tol.extrapolation_spread,
        tol=tol.tail_relative,
    )
    w1_limit = asymptotics.extrapolate_sigma_zero(
        asymptotics.windowed_series(lambda g: heat.w1_square_series(free_blocks, g), windows, ppd),
        config.degrees,
        windows,
        threshold=tol.extrapolation_spread,
        tol=tol.tail_relative,
    )

    report: dict[str, Any] = {
        "N": n_trunc,
        "f": list(config.f.legendre_coeffs),
        "heat_coefficients": {
            "fits": [_fit_dict(fit) for fit in fits],
            "c0": c0,
            "c1": c1,
            "A0": a0,
            "A2": a2,
        },
        "delta2a_over_gamma4_limit": {
            **w2_limit.as_dict(),
            "target": quartic / (8.0 * math.pi),
        },
        "sigma_tr_W1sq_limit": {
            **w1_limit.as_dict(),
            "target": 2.0 * gradient / (4.0 * math.pi),
            "diagonal_approximation_CW1W1": w1_limit.limit / 2.0,
        },
        "coefficient_shift": [
            shift.as_dict()
            for shift in asymptotics.coefficient_shift(
                config.deformation(0.0), positive, windows, config.degrees, ppd
            )
        ],
        "CW1W1": None,
        "gamma_order": None,
    }

    if positive:
        base = config.deformation(positive[0])
        cw1w1 = asymptotics.estimate_CW1W1(
            [base.with_truncation(n) for n in truncations],
            windows,
            config.degrees,
            ppd,
        )
        report["CW1W1"] = {**cw1w1.as_dict(), "gamma": positive[0]}
        order = asymptotics.gamma_order_check(
            ORDER_CHECK_SIGMA, max(positive), config.deformation(max(positive))
        )
        report["gamma_order"] = order.as_dict()
    else:
        logger.warning("No positive gamma configured; C_W1W1 and order check skipped")

    return report


def cmd_validate(config: RunConfig) -> tuple[list[validation.CheckReport], bool]:
    """Run the validation suite.

    Returns:
        tuple: The reports (sorted by name) and whether the suite passed.
    """
    reports = validation.run_suite(
        config.truncation_N,
        config.gammas,
        config.f,
        tol=config.tolerances,
        seed=config.seed,
    )
    return reports, validation.suite_passed(reports)


def reports_table(reports: list[validation.CheckReport]) -> pl.DataFrame:
    """Compact table of check reports for the terminal."""
    return pl.DataFrame(
        {
            "name": [r.name for r in reports],
            "max_deviation": [r.max_deviation for r in reports],
            "threshold": [r.threshold for r in reports],
            "passed": [r.passed for r in reports],
            "negative_control": [r.expected_failure for r in reports],
            "ok": [r.ok for r in reports],
        }
    )
