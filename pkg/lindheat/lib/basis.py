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

"""Truncated spin-weighted harmonic basis on the unit two-sphere.

The basis functions are the polar profiles

    Phi_{s,j,m}(x) = sqrt((2j+1)/2) * d^j_{m,-s}(theta),   x = cos(theta),

which are orthonormal on [-1, 1] with the plain dx measure. The azimuthal factor
exp(i m phi)/sqrt(2 pi) never appears explicitly: every operator built here is
axisymmetric, so it is diagonal in m and each m is handled as its own block.
"""

import functools
import logging
import math
from dataclasses import dataclass

# pylint: disable=import-error
import numpy as np
from scipy.special import gammaln

from .default import NEWTON_MAX_ITER
from .errors import ConfigError
from .errors import NumericalError

# pylint: enable=import-error

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class HalfInt:
    """Half-integer stored as twice its value, so index arithmetic stays exact."""

    doubled: int

    @classmethod
    def of(cls, value: float) -> "HalfInt":
        """Build from a float such as 0.5 or -3.5."""
        doubled = round(2 * value)
        if abs(doubled - 2 * value) > 1e-9:
            raise ConfigError(f"ERROR: {value} is not a multiple of 1/2!")
        return cls(int(doubled))

    @property
    def value(self) -> float:
        return self.doubled / 2

    @property
    def is_half_odd(self) -> bool:
        return self.doubled % 2 == 1

    def __add__(self, other: "HalfInt") -> "HalfInt":
        return HalfInt(self.doubled + other.doubled)

    def __sub__(self, other: "HalfInt") -> "HalfInt":
        return HalfInt(self.doubled - other.doubled)

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.doubled)

    def __abs__(self) -> "HalfInt":
        return HalfInt(abs(self.doubled))

    def __str__(self) -> str:
        if self.doubled % 2 == 0:
            return str(self.doubled // 2)
        return f"{self.doubled}/2"


HALF = HalfInt(1)
SPIN_UP = HalfInt(1)
SPIN_DOWN = HalfInt(-1)


@dataclass(frozen=True)
class BasisIndex:
    """One basis state (s, j, m) of the truncated spinor basis."""

    s: HalfInt
    j: HalfInt
    m: HalfInt

    def __post_init__(self):
        if self.s not in (SPIN_UP, SPIN_DOWN):
            raise ConfigError(f"ERROR: Spin weight must be +1/2 or -1/2, got {self.s}!")
        if not (self.j.is_half_odd and self.m.is_half_odd):
            raise ConfigError(f"ERROR: j={self.j} and m={self.m} must be half-odd integers!")
        diff = self.j.doubled - abs(self.m.doubled)
        if diff < 0 or diff % 2 != 0:
            raise ConfigError(f"ERROR: Invalid basis index j={self.j}, m={self.m}!")

    @property
    def level(self) -> int:
        """Shell number n = j + 1/2 (n >= 1)."""
        return (self.j.doubled + 1) // 2

    @property
    def d2_value(self) -> int:
        """Eigenvalue of the squared Dirac operator, (j + 1/2)^2."""
        return self.level**2


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss-Legendre rule on [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True, eq=False)
class WignerTable:
    """Normalized profiles Phi_{s,j,m} at the nodes of a quadrature rule.

    Rows run over j = max(1/2, |m|) ... N - 1/2 in ascending order, columns over nodes.
    """

    m: HalfInt
    s: HalfInt
    j_values: tuple[HalfInt, ...]
    values: np.ndarray

    @property
    def size(self) -> int:
        return len(self.j_values)


def _legendre_with_derivative(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return P_n(x) and P_n'(x) from the three-term recurrence."""
    p_prev = np.ones_like(x)
    p_cur = x.copy()
    for k in range(1, n):
        p_prev, p_cur = p_cur, ((2 * k + 1) * x * p_cur - k * p_prev) / (k + 1)
    if n == 0:
        return p_prev, np.zeros_like(x)
    dp = n * (x * p_cur - p_prev) / (x * x - 1.0)
    return p_cur, dp


@functools.lru_cache(maxsize=32)
def gauss_legendre_rule(n: int) -> QuadratureRule:
    """Gauss-Legendre nodes and weights by Newton iteration on P_n.

    Args:
        n (int): Number of nodes (>= 1).

    Returns:
        QuadratureRule: Ascending nodes, positive weights summing to 2.

    Raises:
        ConfigError: If n < 1.
        NumericalError: If a root does not converge within the iteration cap.
    """
    if n < 1:
        raise ConfigError(f"ERROR: Quadrature size must be >= 1, got {n}!")

    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (4 * k - 1) / (4 * n + 2))
    active = np.ones(n, dtype=bool)
    for _ in range(NEWTON_MAX_ITER):
        if not active.any():
            break
        p, dp = _legendre_with_derivative(n, x[active])
        step = p / dp
        x[active] -= step
        active[np.flatnonzero(active)[np.abs(step) <= 1e-14]] = False
    if active.any():
        idx = int(np.flatnonzero(active)[0])
        raise NumericalError(f"ERROR: Gauss-Legendre root {idx} of n={n} did not converge!")

    _, dp = _legendre_with_derivative(n, x)
    weights = 2.0 / ((1.0 - x * x) * dp * dp)

    order = np.argsort(x)
    x, weights = x[order], weights[order]
    # exact mirror symmetry of the rule
    x = 0.5 * (x - x[::-1])
    weights = 0.5 * (weights + weights[::-1])
    x.setflags(write=False)
    weights.setflags(write=False)

    return QuadratureRule(nodes=x, weights=weights)


def quadrature_size(n_trunc: int, degree_f: int) -> int:
    """Number of nodes making every assembled integrand exact.

    Integrands are polynomials of degree <= 2N + 4 L + 1 (basis products times f^4).
    The floor 2N + 8 is kept for small data.
    """
    return max(2 * n_trunc + 8, n_trunc + 2 * degree_f + 1)


def azimuthal_indices(n_trunc: int) -> list[HalfInt]:
    """All m from -(N - 1/2) to N - 1/2 in ascending order."""
    return [HalfInt(d) for d in range(-(2 * n_trunc - 1), 2 * n_trunc, 2)]


def _j_range(n_trunc: int, m: HalfInt) -> list[HalfInt]:
    j_min = max(HALF, abs(m))
    return [HalfInt(d) for d in range(j_min.doubled, 2 * n_trunc, 2)]


def enumerate_block(n_trunc: int, m: HalfInt) -> list[BasisIndex]:
    """Ordered basis of the azimuthal block m: s = +1/2 first, then s = -1/2, j ascending.

    Args:
        n_trunc (int): Truncation N.
        m (HalfInt): Azimuthal index.

    Returns:
        list[BasisIndex]: The block basis, of size 2 (N - |m| + 1/2).
    """
    if abs(m).doubled > 2 * n_trunc - 1:
        raise ConfigError(f"ERROR: |m|={abs(m)} exceeds N - 1/2 for N={n_trunc}!")
    j_values = _j_range(n_trunc, m)
    return [BasisIndex(s, j, m) for s in (SPIN_UP, SPIN_DOWN) for j in j_values]


def _d_terms(j: HalfInt, m1: HalfInt, m2: HalfInt):
    """Yield (sign, log|coef|, cos power, sin power) of the factorial sum for d^j_{m1 m2}."""
    jm1p = (j.doubled + m1.doubled) // 2
    jm1m = (j.doubled - m1.doubled) // 2
    jm2p = (j.doubled + m2.doubled) // 2
    jm2m = (j.doubled - m2.doubled) // 2
    delta = (m1.doubled - m2.doubled) // 2
    log_pref = 0.5 * (gammaln(jm1p + 1) + gammaln(jm1m + 1) + gammaln(jm2p + 1) + gammaln(jm2m + 1))
    for k in range(max(0, -delta), min(jm2p, jm1m) + 1):
        log_coef = log_pref - (
            gammaln(jm2p - k + 1) + gammaln(k + 1) + gammaln(delta + k + 1) + gammaln(jm1m - k + 1)
        )
        sign = -1.0 if (delta + k) % 2 else 1.0
        yield sign, float(log_coef), j.doubled - delta - 2 * k, delta + 2 * k


def wigner_d_explicit(j: HalfInt, m1: HalfInt, m2: HalfInt, theta) -> np.ndarray:
    """Wigner small-d function d^j_{m1 m2}(theta) from the explicit factorial sum.

    Independent of the recursion in `wigner_table`; meant for small j.
    """
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    total = np.zeros_like(theta)
    for sign, log_coef, pow_c, pow_s in _d_terms(j, m1, m2):
        total = total + sign * math.exp(log_coef) * c**pow_c * s**pow_s
    return total


def wigner_table(n_trunc: int, m: HalfInt, s: HalfInt, rule: QuadratureRule) -> WignerTable:
    """Tabulate Phi_{s,j,m} at the rule nodes by upward recursion in j.

    The recursion for d^j_{m,q}, q = -s, is seeded with the closed form at
    j = max(1/2, |m|), where the factorial sum has a single term.

    Args:
        n_trunc (int): Truncation N.
        m (HalfInt): Azimuthal index, |m| <= N - 1/2.
        s (HalfInt): Spin weight, +1/2 or -1/2.
        rule (QuadratureRule): Quadrature rule with at least 2N + 8 nodes.

    Returns:
        WignerTable: The tabulated profiles.

    Raises:
        ConfigError: On invalid arguments or an empty table.
        NumericalError: If the recursion overflows even after rescaling.
    """
    if s not in (SPIN_UP, SPIN_DOWN):
        raise ConfigError(f"ERROR: Spin weight must be +1/2 or -1/2, got {s}!")
    if abs(m).doubled > 2 * n_trunc - 1:
        raise ConfigError(f"ERROR: Empty table: |m|={abs(m)} exceeds N - 1/2 for N={n_trunc}!")
    if rule.size < 2 * n_trunc + 8:
        raise ConfigError(f"ERROR: Quadrature rule of size {rule.size} too small for N={n_trunc}!")

    q = -s
    j_values = _j_range(n_trunc, m)
    j_min = j_values[0]
    x = rule.nodes

    terms = list(_d_terms(j_min, m, q))
    if len(terms) != 1:
        raise NumericalError(f"ERROR: Seed of d^{j_min}_({m},{q}) is not a single term!")
    sign, log_coef, pow_c, pow_s = terms[0]
    log_seed = (
        log_coef + 0.5 * pow_c * np.log((1.0 + x) / 2.0) + 0.5 * pow_s * np.log((1.0 - x) / 2.0)
    )

    seed = sign * np.exp(log_seed)
    rescale = bool(np.any(np.abs(seed) < np.finfo(float).tiny))
    if rescale:
        logger.debug("Seed underflow for m=%s s=%s, recursing on rescaled values", m, s)
        seed = np.full_like(x, sign)

    values = _recurse(j_values, m.value, q.value, x, seed)
    if rescale:
        values = values * np.exp(log_seed)
        if not np.all(np.isfinite(values)):
            raise NumericalError(f"ERROR: Wigner recursion overflow for m={m}, s={s}!")

    norms = np.sqrt([(jv.doubled + 1) / 2.0 for jv in j_values])
    values = values * norms[:, None]
    values.setflags(write=False)

    return WignerTable(m=m, s=s, j_values=tuple(j_values), values=values)


def _recurse(j_values: list[HalfInt], m: float, q: float, x: np.ndarray, seed: np.ndarray):
    """Upward three-term recursion for d^j_{m q}(theta(x)) over the given j range."""
    values = np.empty((len(j_values), len(x)))
    values[0] = seed
    d_prev = np.zeros_like(x)
    for row in range(1, len(j_values)):
        j = j_values[row - 1].value
        jp1 = j + 1.0
        a = math.sqrt((jp1 * jp1 - m * m) * (jp1 * jp1 - q * q))
        b = math.sqrt(max((j * j - m * m) * (j * j - q * q), 0.0))
        c1 = jp1 * (2.0 * j + 1.0) / a
        c2 = jp1 * b / (j * a)
        values[row] = c1 * (x - m * q / (j * jp1)) * values[row - 1] - c2 * d_prev
        d_prev = values[row - 1]
        if not np.all(np.isfinite(values[row])):
            raise NumericalError(f"ERROR: Wigner recursion overflow at j={j_values[row]}!")
    return values


def orthonormality_residual(table: WignerTable, rule: QuadratureRule) -> float:
    """Max deviation of the quadrature Gram matrix of a table from the identity."""
    gram = (table.values * rule.weights) @ table.values.T
    return float(np.max(np.abs(gram - np.eye(table.size))))
