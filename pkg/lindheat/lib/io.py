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
Module for io operations: run configuration and result files.
"""

import json
import logging
import math
import os
from dataclasses import dataclass
from typing import Any

# pylint: disable=import-error
import numpy as np
import polars as pl

from .aux import convert
from .aux import log_grid
from .default import FIT_DEGREE_CAP
from .default import default_config
from .errors import ConfigError
from .operators import DeformationConfig
from .operators import ScalarDatum
from .operators import Tolerances

# pylint: enable=import-error

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:  # pylint: disable=too-many-instance-attributes
    """Validated run configuration."""

    truncation_N: int  # pylint: disable=invalid-name
    gammas: tuple[float, ...]
    sigma_min: float
    sigma_max: float
    points_per_decade: int
    f: ScalarDatum
    windows: tuple[tuple[float, float], ...]
    degrees: tuple[int, ...]
    tolerances: Tolerances
    output_dir: str
    seed: int

    def deformation(self, gamma: float) -> DeformationConfig:
        """DeformationConfig at the given coupling and the configured truncation."""
        return DeformationConfig(
            N=self.truncation_N,
            gamma=gamma,
            f=self.f,
            tol=self.tolerances,
        )

    def grid(self) -> np.ndarray:
        return log_grid(self.sigma_min, self.sigma_max, self.points_per_decade)


def _merge(defaults: dict, user: dict, prefix: str = "") -> dict:
    """Overlay user values on the defaults; unknown keys are an error."""
    if not isinstance(user, dict):
        raise ConfigError(f"ERROR: Expected an object for '{prefix or 'config'}', got {user!r}!")
    merged = dict(defaults)
    for key, value in user.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in defaults:
            raise ConfigError(f"ERROR: Unknown configuration key '{path}'!")
        if key != "tolerances" and isinstance(defaults[key], dict):
            merged[key] = _merge(defaults[key], value, path)
        else:
            merged[key] = value
    return merged


def _as_list(value: Any, name: str) -> list:
    if not isinstance(value, list):
        raise ConfigError(f"ERROR: Expected a list for '{name}', got {value!r}!")
    return value


def config_from_dict(raw: dict[str, Any]) -> RunConfig:
    """Merge a raw configuration over the defaults and validate it.

    Args:
        raw (dict): Parsed JSON configuration (may be partial).

    Returns:
        RunConfig: The validated configuration.

    Raises:
        ConfigError: On unknown keys or invalid values.
    """
    cfg = _merge(default_config(), raw)

    n_trunc = convert(cfg["truncation_N"], int, "truncation_N")
    if n_trunc < 1:
        raise ConfigError(f"ERROR: truncation_N must be >= 1, got {n_trunc}!")

    gammas = tuple(
        convert(g, float, f"gammas[{k}]") for k, g in enumerate(_as_list(cfg["gammas"], "gammas"))
    )
    if not gammas:
        raise ConfigError("ERROR: The list 'gammas' is empty!")
    if any(g < 0 or not math.isfinite(g) for g in gammas):
        raise ConfigError(f"ERROR: gammas must be finite and >= 0, got {list(gammas)}!")

    sigma_min = convert(cfg["sigma"]["min"], float, "sigma.min")
    sigma_max = convert(cfg["sigma"]["max"], float, "sigma.max")
    ppd = convert(cfg["sigma"]["points_per_decade"], int, "sigma.points_per_decade")
    if not 0 < sigma_min < sigma_max:
        raise ConfigError(f"ERROR: Need 0 < sigma.min < sigma.max, got {sigma_min}, {sigma_max}!")
    if ppd < 1:
        raise ConfigError(f"ERROR: sigma.points_per_decade must be >= 1, got {ppd}!")

    legendre = _as_list(cfg["f"]["legendre"], "f.legendre")
    f = ScalarDatum(tuple(convert(c, float, f"f.legendre[{k}]") for k, c in enumerate(legendre)))

    windows = []
    for k, window in enumerate(_as_list(cfg["fit"]["windows"], "fit.windows")):
        window = _as_list(window, f"fit.windows[{k}]")
        if len(window) != 2:
            raise ConfigError(f"ERROR: fit.windows[{k}] must be [lo, hi], got {window}!")
        lo = convert(window[0], float, f"fit.windows[{k}][0]")
        hi = convert(window[1], float, f"fit.windows[{k}][1]")
        if not sigma_min <= lo < hi <= sigma_max:
            raise ConfigError(
                f"ERROR: fit.windows[{k}]=[{lo}, {hi}] not inside [{sigma_min}, {sigma_max}]!"
            )
        windows.append((lo, hi))
    if len(windows) < 2:
        raise ConfigError(f"ERROR: At least two fit windows needed, got {len(windows)}!")

    degrees = tuple(
        convert(d, int, f"fit.degrees[{k}]")
        for k, d in enumerate(_as_list(cfg["fit"]["degrees"], "fit.degrees"))
    )
    if not degrees or any(not 0 <= d <= FIT_DEGREE_CAP for d in degrees):
        raise ConfigError(f"ERROR: fit.degrees must lie in [0, {FIT_DEGREE_CAP}], got {degrees}!")

    tolerances = cfg["tolerances"]
    if not isinstance(tolerances, dict):
        raise ConfigError(f"ERROR: Expected an object for 'tolerances', got {tolerances!r}!")

    return RunConfig(
        truncation_N=n_trunc,
        gammas=gammas,
        sigma_min=sigma_min,
        sigma_max=sigma_max,
        points_per_decade=ppd,
        f=f,
        windows=tuple(windows),
        degrees=degrees,
        tolerances=Tolerances.from_overrides(tolerances),
        output_dir=convert(cfg["output_dir"], str, "output_dir"),
        seed=convert(cfg["seed"], int, "seed"),
    )


def load_config(filename: str) -> RunConfig:
    """Load a JSON run configuration.

    Args:
        filename (str): Path of the JSON file.

    Returns:
        RunConfig: The validated configuration.

    Raises:
        ConfigError: If the file cannot be read or parsed, or is invalid.
    """
    try:
        with open(filename, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"ERROR: Cannot read configuration '{filename}': {exc}") from exc
    logger.info("Loaded configuration %s", filename)
    return config_from_dict(raw)


def save_csv(filename: str, table: pl.DataFrame):
    """Save a DataFrame as CSV with 17 significant digits and '\\n' line endings.

    Args:
        filename (str): Output path; parent directories are created.
        table (pl.DataFrame): Table to write.
    """
    os.makedirs(os.path.dirname(filename) or ".", exist_ok=True)
    table.write_csv(
        filename,
        include_header=True,
        float_scientific=True,
        float_precision=16,
        line_terminator="\n",
    )
    logger.info("Wrote %s (%d rows)", filename, len(table))


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def save_json(filename: str, data: dict[str, Any]):
    """Save a JSON report; non-finite numbers are written as strings."""
    os.makedirs(os.path.dirname(filename) or ".", exist_ok=True)
    with open(filename, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")
    logger.info("Wrote %s", filename)
