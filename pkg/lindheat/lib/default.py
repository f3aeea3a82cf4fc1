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

"""
Module defining default values
"""

import copy
from typing import Any

# pylint: disable=import-error
import polars as pl

# pylint: enable=import-error

THEME = "solarized-box"  # Theme for CLI (see rich-click documentation for alternatives)
HELP_MAX_WIDTH = 80  # Maximum width (in characters) of help messages

THREADS_ENV = "LINDHEAT_THREADS"
"""Environment variable holding the number of worker threads for block-parallel work."""

L_MAX = 8  # Highest Legendre degree accepted for the scalar datum f

PHI2_SWITCH = 0.05  # |z| below which phi2 is evaluated from its Taylor series
PHI2_TERMS = 10

POINTS_PER_DECADE = 40
FIT_DEGREE_CAP = 4

DEFAULT_WINDOWS = ((0.008, 0.03), (0.015, 0.06))
DEFAULT_DEGREES = (2, 3)

NEWTON_MAX_ITER = 100  # Iteration cap of the Gauss-Legendre root solve

TOLERANCES = {
    # numerical tolerances (must be > 0)
    "eig_residual": 1e-10,
    "tail_relative": 1e-10,
    "noise_floor": 1e-14,
    # check thresholds (may be set to 0)
    "orthonormality": 1e-12,
    "free_spectrum": 1e-10,
    "prop_vanishing": 1e-14,
    "convention_invariance": 1e-12,
    "monolithic_equivalence": 1e-10,
    "clifford_trace": 1e-3,
    "extrapolation_spread": 1e-2,
    "cw1w1_spread": 2e-2,
}
"""Single table of tolerances and check thresholds. Overridable via the run config."""

POSITIVE_TOLERANCES = ("eig_residual", "tail_relative", "noise_floor")


def default_config() -> dict[str, Any]:
    """Return the default run configuration.

    Returns:
        dict: Run configuration with every field accepted in a JSON config file.
    """
    config = {
        "truncation_N": 100,
        "gammas": [0.3, 0.6],
        "sigma": {"min": 0.004, "max": 1.0, "points_per_decade": POINTS_PER_DECADE},
        "f": {"legendre": [0.0, 1.0]},
        "fit": {
            "windows": [list(w) for w in DEFAULT_WINDOWS],
            "degrees": list(DEFAULT_DEGREES),
        },
        "tolerances": {},
        "output_dir": "lindheat_out",
        "seed": 12345,
    }

    return copy.deepcopy(config)


def spectrum_schema() -> dict:
    """Return the column schema of the spectrum CSV.

    Returns:
        dict: Column name to polars data type.
    """
    return {
        "m": pl.Float64,
        "index": pl.Int64,
        "eigenvalue": pl.Float64,
        "gamma": pl.Float64,
    }


def heat_schema() -> dict:
    """Return the column schema of the heat-trace CSV.

    Returns:
        dict: Column name to polars data type.
    """
    return {
        "sigma": pl.Float64,
        "K0": pl.Float64,
        "Kgamma": pl.Float64,
        "delta1": pl.Float64,
        "delta2a": pl.Float64,
        "delta2b": pl.Float64,
        "remainder": pl.Float64,
        "tail_bound": pl.Float64,
    }


def dseff_schema() -> dict:
    """Return the column schema of the spectral-dimension CSV.

    Returns:
        dict: Column name to polars data type.
    """
    return {
        "sigma": pl.Float64,
        "dseff_free": pl.Float64,
        "dseff_gamma": pl.Float64,
        "dseff_w2_projection": pl.Float64,
    }
