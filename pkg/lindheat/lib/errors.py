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

"""Exceptions raised by the library. The CLI maps them to exit codes."""


class LindheatError(Exception):
    """Base class of all errors raised by lindheat."""


class ConfigError(LindheatError, ValueError):
    """Invalid run configuration or invalid arguments to an operation."""


class WindowError(ConfigError):
    """A sigma window violates the valid-window rule.

    Attributes:
        offending (list[float]): The sigma values that violate the rule.
    """

    def __init__(self, message: str, offending: list[float]):
        super().__init__(message)
        self.offending = offending


class NumericalError(LindheatError, ArithmeticError):
    """Numerical failure: non-convergence, overflow or rank deficiency."""
