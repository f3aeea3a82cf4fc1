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
Module containing auxiliary functions.
"""

import math
import os
from collections.abc import Callable
from collections.abc import Iterable
from typing import Any

# pylint: disable=import-error
import numpy as np

from .default import THREADS_ENV
from .errors import ConfigError

# pylint: enable=import-error


def convert(value: Any, dtype: type, name: str) -> Any:
    """Convert a configuration value to a specified data type.

    Args:
        value (Any): The value read from the JSON configuration.
        dtype (type): Target type. Supported types are bool, float, int and str.
        name (str): Key path of the value, used in error messages.

    Returns:
        Any: The converted value.

    Raises:
        ConfigError: If the conversion fails or if an unsupported data type is requested.
    """

    if dtype is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"ERROR: Cannot convert '{value}' to bool for '{name}'!")
        return value
    if isinstance(value, bool):  # bool is an int subclass, reject it for numbers
        raise ConfigError(f"ERROR: Expected a number for '{name}', got '{value}'!")
    if dtype is float:
        return _try_convert(value, float, name)
    if dtype is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"ERROR: Expected an integer for '{name}', got {value}!")
        return _try_convert(value, int, name)
    if dtype is str:
        return str(value)

    raise ConfigError(f"ERROR: Unsupported type {dtype} for '{name}'!")


def _try_convert(value: Any, conv_fct: Callable[[Any], int | float], name: str) -> int | float:
    """Attempt to convert a value to a specified numeric type.

    Args:
        value (Any): The value to be converted.
        conv_fct (Callable): The conversion function to use.
            Should be either `int` or `float`.
        name (str): Key path of the value, used in error messages.

    Returns:
        Any: The converted value using the provided conversion function.

    Raises:
        ConfigError: If the conversion fails due to an invalid value format.
    """

    try:
        value_conv = conv_fct(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"ERROR: Cannot convert {value} to {conv_fct} for '{name}'") from exc

    return value_conv


def fsum(values: Iterable[float]) -> float:
    """Exactly rounded sum of floats in the given (fixed) order."""
    return math.fsum(float(v) for v in values)


def log_grid(sigma_min: float, sigma_max: float, points_per_decade: int) -> np.ndarray:
    """Return an ascending, log-spaced sigma grid including both end points.

    Args:
        sigma_min (float): Smallest sigma (> 0).
        sigma_max (float): Largest sigma (> sigma_min).
        points_per_decade (int): Grid density.

    Returns:
        np.ndarray: The grid.
    """
    if sigma_min <= 0 or sigma_max <= sigma_min:
        raise ConfigError(f"ERROR: Invalid sigma range [{sigma_min}, {sigma_max}]!")
    if points_per_decade < 1:
        raise ConfigError(f"ERROR: points_per_decade must be >= 1, got {points_per_decade}!")
    decades = math.log10(sigma_max / sigma_min)
    count = max(2, int(round(decades * points_per_decade)) + 1)
    return np.logspace(math.log10(sigma_min), math.log10(sigma_max), count)


def thread_count() -> int:
    """Number of worker threads, read from the environment (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        count = int(raw)
    except ValueError as exc:
        raise ConfigError(f"ERROR: {THREADS_ENV} must be an integer, got '{raw}'") from exc
    return max(1, count)
