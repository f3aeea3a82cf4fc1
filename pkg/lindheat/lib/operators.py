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

"""Per-block assembly of D^2, W1, W2 and Q_gamma = D^2 + gamma^2 W1 + gamma^4 W2.

The deformation is driven by an axisymmetric real scalar f, so every operator
commutes with the azimuthal generator and splits into independent blocks of
fixed m. Inside a block the basis is ordered s = +1/2 first, then s = -1/2, each
ascending in j (see `basis.enumerate_block`).

W1 = -i f c(df) only couples opposite spin weights. The phase of c(dtheta) is
fixed so that W1 is real symmetric with cross block built from
h = -f f_theta = f (df/dx) sin(theta). W2 = f^4/4 is multiplicative and
couples equal spin weights only.
"""

import dataclasses
import functools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

# pylint: disable=import-error
import numpy as np
import scipy.linalg as sla
from numpy.polynomial import legendre as leg

from . import aux
from .basis import SPIN_DOWN
from .basis import SPIN_UP
from .basis import BasisIndex
from .basis import HalfInt
from .basis import QuadratureRule
from .basis import WignerTable
from .basis import azimuthal_indices
from .basis import enumerate_block
from .basis import gauss_legendre_rule
from .basis import quadrature_size
from .basis import wigner_table
from .default import L_MAX
from .default import POSITIVE_TOLERANCES
from .default import TOLERANCES
from .errors import ConfigError
from .linalg import EigenDecomposition
from .linalg import eigh_symmetric

# pylint: enable=import-error

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScalarDatum:
    """Axisymmetric scalar f(theta) = sum_L c_L P_L(cos theta), L <= L_MAX."""

    legendre_coeffs: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.legendre_coeffs)
        if not coeffs:
            raise ConfigError("ERROR: Legendre coefficient list of f is empty!")
        if len(coeffs) > L_MAX + 1:
            raise ConfigError(
                f"ERROR: f has {len(coeffs)} Legendre coefficients, at most {L_MAX + 1} allowed!"
            )
        if not all(math.isfinite(c) for c in coeffs):
            raise ConfigError(f"ERROR: Non-finite Legendre coefficient in {coeffs}!")
        object.__setattr__(self, "legendre_coeffs", coeffs)

    @classmethod
    def cos_theta(cls) -> "ScalarDatum":
        return cls((0.0, 1.0))

    @property
    def degree(self) -> int:
        """Highest L with a nonzero coefficient (0 for the zero datum)."""
        nonzero = [k for k, c in enumerate(self.legendre_coeffs) if c != 0.0]
        return nonzero[-1] if nonzero else 0

    @property
    def is_constant(self) -> bool:
        return self.degree == 0

    def values(self, x) -> np.ndarray:
        return leg.legval(np.asarray(x, dtype=float), self.legendre_coeffs)

    def dfdx(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if len(self.legendre_coeffs) == 1:
            return np.zeros_like(x)
        return leg.legval(x, leg.legder(self.legendre_coeffs))

    def dtheta(self, x) -> np.ndarray:
        """theta-derivative, using dP_L/dtheta = -sin(theta) dP_L/dx."""
        x = np.asarray(x, dtype=float)
        return -np.sqrt(1.0 - x * x) * self.dfdx(x)

    def __str__(self) -> str:
        terms = [f"{c:g}*P{k}" for k, c in enumerate(self.legendre_coeffs) if c != 0.0]
        return "+".join(terms) or "0"


@dataclass(frozen=True)
class Tolerances:
    """The tolerance table as an immutable bundle (field names match `default.TOLERANCES`)."""

    eig_residual: float = TOLERANCES["eig_residual"]
    tail_relative: float = TOLERANCES["tail_relative"]
    noise_floor: float = TOLERANCES["noise_floor"]
    orthonormality: float = TOLERANCES["orthonormality"]
    free_spectrum: float = TOLERANCES["free_spectrum"]
    prop_vanishing: float = TOLERANCES["prop_vanishing"]
    convention_invariance: float = TOLERANCES["convention_invariance"]
    monolithic_equivalence: float = TOLERANCES["monolithic_equivalence"]
    clifford_trace: float = TOLERANCES["clifford_trace"]
    extrapolation_spread: float = TOLERANCES["extrapolation_spread"]
    cw1w1_spread: float = TOLERANCES["cw1w1_spread"]

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not math.isfinite(value) or value < 0:
                raise ConfigError(f"ERROR: Tolerance '{field.name}' must be >= 0, got {value}!")
            if field.name in POSITIVE_TOLERANCES and value == 0:
                raise ConfigError(f"ERROR: Tolerance '{field.name}' must be > 0!")

    @classmethod
    def from_overrides(cls, overrides: dict | None = None) -> "Tolerances":
        """Build from the defaults, overriding a subset of named entries.

        Raises:
            ConfigError: On unknown names or invalid values.
        """
        overrides = overrides or {}
        known = {field.name for field in dataclasses.fields(cls)}
        for key in overrides:
            if key not in known:
                raise ConfigError(f"ERROR: Unknown tolerance 'tolerances.{key}'!")
        return cls(**{k: aux.convert(v, float, f"tolerances.{k}") for k, v in overrides.items()})

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class DeformationConfig:
    """Truncation N, coupling gamma, scalar datum f and tolerances of one assembly."""

    N: int  # pylint: disable=invalid-name
    gamma: float
    f: ScalarDatum = dataclasses.field(default_factory=ScalarDatum.cos_theta)
    tol: Tolerances = dataclasses.field(default_factory=Tolerances)

    def __post_init__(self):
        if isinstance(self.N, bool) or not isinstance(self.N, int) or self.N < 1:
            raise ConfigError(f"ERROR: Truncation N must be a positive integer, got {self.N}!")
        if not math.isfinite(self.gamma) or self.gamma < 0:
            raise ConfigError(f"ERROR: gamma must be finite and >= 0, got {self.gamma}!")
        object.__setattr__(self, "gamma", float(self.gamma))

    def with_gamma(self, gamma: float) -> "DeformationConfig":
        return dataclasses.replace(self, gamma=gamma)

    def with_truncation(self, n_trunc: int) -> "DeformationConfig":
        return dataclasses.replace(self, N=n_trunc)

    @property
    def dimension(self) -> int:
        """Dimension 2N(N+1) of the truncated spinor space."""
        return 2 * self.N * (self.N + 1)


@dataclass(frozen=True, eq=False)
class SpectralBlock:  # pylint: disable=too-many-instance-attributes
    """Dense matrices of one azimuthal block at a fixed gamma.

    Attributes:
        m (HalfInt): Azimuthal index.
        basis (tuple[BasisIndex, ...]): Ordered block basis.
        d2_diag (np.ndarray): Diagonal (j + 1/2)^2 of D^2.
        w1 (np.ndarray): Commutator sector, cross-spin blocks only.
        w2 (np.ndarray): Multiplicative sector f^4/4, same-spin blocks only.
        gamma (float): Coupling.
        q_gamma (np.ndarray): diag(d2_diag) + gamma^2 w1 + gamma^4 w2.
        tol_eig (float): Residual tolerance of the eigendecomposition.
    """

    m: HalfInt
    basis: tuple[BasisIndex, ...]
    d2_diag: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    gamma: float
    q_gamma: np.ndarray
    tol_eig: float = TOLERANCES["eig_residual"]

    @classmethod
    def build(cls, m, basis, w1, w2, gamma, tol_eig=TOLERANCES["eig_residual"]) -> "SpectralBlock":
        """Form q_gamma from its parts."""
        d2_diag = np.array([b.d2_value for b in basis], dtype=float)
        q_gamma = np.diag(d2_diag) + gamma**2 * w1 + gamma**4 * w2
        return cls(
            m=m,
            basis=tuple(basis),
            d2_diag=d2_diag,
            w1=w1,
            w2=w2,
            gamma=float(gamma),
            q_gamma=q_gamma,
            tol_eig=tol_eig,
        )

    def replace_operators(self, w1=None, w2=None) -> "SpectralBlock":
        """Copy of the block with W1 and/or W2 swapped out, Q_gamma rebuilt."""
        return SpectralBlock.build(
            self.m,
            self.basis,
            self.w1 if w1 is None else w1,
            self.w2 if w2 is None else w2,
            self.gamma,
            self.tol_eig,
        )

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def sector_size(self) -> int:
        """Number of states per spin weight."""
        return len(self.basis) // 2

    def eigen(self) -> EigenDecomposition:
        """Full eigendecomposition of q_gamma (not cached)."""
        return eigh_symmetric(self.q_gamma, self.tol_eig)

    @functools.cached_property
    def eigenvalues(self) -> np.ndarray:
        """Ascending eigenvalues of q_gamma, computed once."""
        values = self.eigen().values
        values.setflags(write=False)
        return values


def mult_matrix_same_spin(
    g_values, s: HalfInt, m: HalfInt, table: WignerTable, rule: QuadratureRule
) -> np.ndarray:
    """Matrix of the multiplication by g(theta) within one spin-weight sector.

    Entry (j', j) is sum_i w_i Phi_{s,j',m}(x_i) g(x_i) Phi_{s,j,m}(x_i).

    Args:
        g_values (array_like): g at the rule's nodes.
        s (HalfInt): Spin weight of the table.
        m (HalfInt): Azimuthal index of the table.
        table (WignerTable): Profiles for (s, m).
        rule (QuadratureRule): The rule the table was built on.

    Returns:
        np.ndarray: Exactly symmetric square matrix.

    Raises:
        ConfigError: If table, rule and g do not match.
    """
    g_values = np.asarray(g_values, dtype=float)
    if table.s != s or table.m != m:
        raise ConfigError(
            f"ERROR: Table built for (s={table.s}, m={table.m}), requested (s={s}, m={m})!"
        )
    _check_sizes(g_values, rule, table)
    matrix = (table.values * (rule.weights * g_values)) @ table.values.T
    return 0.5 * (matrix + matrix.T)


def mult_matrix_cross_spin(
    h_values, m: HalfInt, table_plus: WignerTable, table_minus: WignerTable, rule: QuadratureRule
) -> np.ndarray:
    """Matrix of h(theta) from the s = +1/2 sector into the s = -1/2 sector.

    Entry (j', j) is sum_i w_i Phi_{-1/2,j',m}(x_i) h(x_i) Phi_{+1/2,j,m}(x_i).
    """
    h_values = np.asarray(h_values, dtype=float)
    if table_plus.s != SPIN_UP or table_minus.s != SPIN_DOWN:
        raise ConfigError("ERROR: Cross-spin matrix needs tables for s=+1/2 and s=-1/2!")
    if table_plus.m != m or table_minus.m != m:
        raise ConfigError(
            f"ERROR: Tables built for m={table_plus.m} and m={table_minus.m}, requested m={m}!"
        )
    _check_sizes(h_values, rule, table_plus)
    _check_sizes(h_values, rule, table_minus)
    return (table_minus.values * (rule.weights * h_values)) @ table_plus.values.T


def _check_sizes(values: np.ndarray, rule: QuadratureRule, table: WignerTable):
    if table.values.shape[1] != rule.size or values.shape != (rule.size,):
        raise ConfigError(
            f"ERROR: Size mismatch: rule {rule.size}, table {table.values.shape[1]},"
            f" values {values.shape}!"
        )


def assemble_W1(  # pylint: disable=invalid-name
    f: ScalarDatum,
    m: HalfInt,
    n_trunc: int,
    tables: tuple[WignerTable, WignerTable],
    rule: QuadratureRule,
) -> np.ndarray:
    """Commutator sector W1 of block m: [[0, B^T], [B, 0]] with B the cross-spin matrix of h.

    Args:
        f (ScalarDatum): Scalar datum.
        m (HalfInt): Azimuthal index.
        n_trunc (int): Truncation N.
        tables (tuple): Tables (s = +1/2, s = -1/2) at m.
        rule (QuadratureRule): Quadrature rule of the tables.

    Returns:
        np.ndarray: Exactly symmetric matrix with zero same-spin blocks.
    """
    table_plus, table_minus = tables
    size = table_plus.size
    if size != len(enumerate_block(n_trunc, m)) // 2:
        raise ConfigError(f"ERROR: Tables do not match block m={m} at N={n_trunc}!")
    if f.is_constant:
        return np.zeros((2 * size, 2 * size))
    x = rule.nodes
    h_values = f.values(x) * f.dfdx(x) * np.sqrt(1.0 - x * x)
    cross = mult_matrix_cross_spin(h_values, m, table_plus, table_minus, rule)

    w1 = np.zeros((2 * size, 2 * size))
    w1[:size, size:] = cross.T
    w1[size:, :size] = cross
    return w1


def assemble_W2(  # pylint: disable=invalid-name
    f: ScalarDatum,
    m: HalfInt,
    n_trunc: int,
    tables: tuple[WignerTable, WignerTable],
    rule: QuadratureRule,
) -> np.ndarray:
    """Multiplicative sector W2 = f^4/4 of block m, zero cross-spin blocks."""
    table_plus, table_minus = tables
    if table_plus.size != len(enumerate_block(n_trunc, m)) // 2:
        raise ConfigError(f"ERROR: Tables do not match block m={m} at N={n_trunc}!")
    g_values = 0.25 * f.values(rule.nodes) ** 4
    upper = mult_matrix_same_spin(g_values, SPIN_UP, m, table_plus, rule)
    lower = mult_matrix_same_spin(g_values, SPIN_DOWN, m, table_minus, rule)
    return sla.block_diag(upper, lower)


def block_rule(n_trunc: int, f: ScalarDatum) -> QuadratureRule:
    """Quadrature rule making every integrand of the assembly exact."""
    return gauss_legendre_rule(quadrature_size(n_trunc, f.degree))


def block_tables(n_trunc: int, m: HalfInt, rule: QuadratureRule):
    """Profile tables (s = +1/2, s = -1/2) of block m."""
    return (
        wigner_table(n_trunc, m, SPIN_UP, rule),
        wigner_table(n_trunc, m, SPIN_DOWN, rule),
    )


@functools.lru_cache(maxsize=1024)
def _block_operators(n_trunc: int, f: ScalarDatum, m: HalfInt):
    """gamma-independent part of block m: (basis, W1, W2)."""
    rule = block_rule(n_trunc, f)
    tables = block_tables(n_trunc, m, rule)
    w1 = assemble_W1(f, m, n_trunc, tables, rule)
    w2 = assemble_W2(f, m, n_trunc, tables, rule)
    w1.setflags(write=False)
    w2.setflags(write=False)
    return tuple(enumerate_block(n_trunc, m)), w1, w2


def assemble_Q(cfg: DeformationConfig, m: HalfInt) -> SpectralBlock:  # pylint: disable=invalid-name
    """Assemble block m of Q_gamma.

    Args:
        cfg (DeformationConfig): Truncation, coupling, datum and tolerances.
        m (HalfInt): Azimuthal index, |m| <= N - 1/2.

    Returns:
        SpectralBlock: The block; q_gamma is exactly diagonal at gamma = 0.
    """
    basis, w1, w2 = _block_operators(cfg.N, cfg.f, m)
    logger.debug("Assembled block m=%s (size %d) at N=%d", m, len(basis), cfg.N)
    return SpectralBlock.build(m, basis, w1, w2, cfg.gamma, cfg.tol.eig_residual)


def _assemble_and_solve(cfg: DeformationConfig, m: HalfInt) -> SpectralBlock:
    block = assemble_Q(cfg, m)
    _ = block.eigenvalues
    return block


@functools.lru_cache(maxsize=4)
def assemble_blocks(cfg: DeformationConfig) -> tuple[SpectralBlock, ...]:
    """All blocks of Q_gamma in ascending m, with eigenvalues computed.

    Blocks are assembled and diagonalised on a thread pool; the result does not depend
    on the number of workers. Results are cached per configuration.
    """
    m_values = azimuthal_indices(cfg.N)
    workers = aux.thread_count()
    logger.info(
        "Assembling %d blocks (N=%d, gamma=%g, f=%s) on %d thread(s)",
        len(m_values),
        cfg.N,
        cfg.gamma,
        cfg.f,
        workers,
    )
    with ThreadPoolExecutor(max_workers=workers) as executor:
        blocks = tuple(executor.map(functools.partial(_assemble_and_solve, cfg), m_values))
    return blocks


def scalar_invariants(f: ScalarDatum, rule: QuadratureRule | None = None) -> tuple[float, float]:
    """Return (int f^4 dvol, int f^2 |grad f|^2 dvol) over the unit sphere.

    Args:
        f (ScalarDatum): Scalar datum.
        rule (QuadratureRule, optional): Rule with at least 8 L + 2 nodes.
            Defaults to a rule exact for every admissible f.

    Returns:
        tuple[float, float]: The two invariants.
    """
    if rule is None:
        rule = gauss_legendre_rule(8 * L_MAX + 2)
    if rule.size < 8 * f.degree + 2:
        raise ConfigError(
            f"ERROR: Quadrature rule of size {rule.size} too small for f of degree {f.degree}!"
        )
    x, w = rule.nodes, rule.weights
    fx = f.values(x)
    dfx = f.dfdx(x)
    quartic = 2.0 * math.pi * aux.fsum(w * fx**4)
    gradient = 2.0 * math.pi * aux.fsum(w * fx**2 * (1.0 - x * x) * dfx**2)
    return quartic, gradient


def operator_blocks(cfg: DeformationConfig) -> list[SpectralBlock]:
    """All blocks in ascending m without diagonalising them."""
    return [assemble_Q(cfg, m) for m in azimuthal_indices(cfg.N)]
