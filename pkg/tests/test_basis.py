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

# pylint: disable=missing-docstring

import math

# pylint: disable=import-error
import numpy as np
import pytest

from lindheat.lib.basis import SPIN_DOWN
from lindheat.lib.basis import SPIN_UP
from lindheat.lib.basis import BasisIndex
from lindheat.lib.basis import HalfInt
from lindheat.lib.basis import azimuthal_indices
from lindheat.lib.basis import enumerate_block
from lindheat.lib.basis import gauss_legendre_rule
from lindheat.lib.basis import orthonormality_residual
from lindheat.lib.basis import quadrature_size
from lindheat.lib.basis import wigner_d_explicit
from lindheat.lib.basis import wigner_table
from lindheat.lib.errors import ConfigError

# pylint: enable=import-error


def test_halfint_arithmetic():
    three_halves = HalfInt.of(1.5)
    assert three_halves.doubled == 3
    assert three_halves + HalfInt(1) == HalfInt(4)
    assert three_halves - HalfInt(5) == HalfInt(-2)
    assert -three_halves == HalfInt(-3)
    assert abs(HalfInt(-7)) == HalfInt(7)
    assert HalfInt(-1) < HalfInt(1)
    assert str(three_halves) == "3/2"
    assert str(HalfInt(4)) == "2"
    with pytest.raises(ConfigError):
        HalfInt.of(0.3)


def test_gauss_legendre_one_node():
    rule = gauss_legendre_rule(1)
    np.testing.assert_array_equal(rule.nodes, [0.0])
    np.testing.assert_allclose(rule.weights, [2.0], rtol=1e-15)


def test_gauss_legendre_two_nodes():
    rule = gauss_legendre_rule(2)
    np.testing.assert_allclose(rule.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], rtol=1e-15)
    np.testing.assert_allclose(rule.weights, [1.0, 1.0], rtol=1e-14)


@pytest.mark.parametrize("n", [3, 7, 16, 57, 128])
def test_gauss_legendre_weights_and_exactness(n):
    rule = gauss_legendre_rule(n)
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.all(rule.weights > 0)
    assert abs(rule.weights.sum() - 2.0) < 1e-13
    for k in (2 * n - 2, 2 * n - 3):
        exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
        assert abs(np.sum(rule.weights * rule.nodes**k) - exact) < 1e-13


def test_gauss_legendre_rejects_empty_rule():
    with pytest.raises(ConfigError):
        gauss_legendre_rule(0)


def test_quadrature_size():
    assert quadrature_size(10, 1) == 28
    assert quadrature_size(2, 8) == 19


def test_wigner_explicit_spin_half():
    half = HalfInt(1)
    assert wigner_d_explicit(half, half, half, math.pi / 2) == pytest.approx(1 / math.sqrt(2))
    assert wigner_d_explicit(half, half, -half, math.pi / 2) == pytest.approx(-1 / math.sqrt(2))


def test_wigner_explicit_unitarity():
    # rows of d^j are orthonormal for fixed theta
    j = HalfInt(5)
    ms = [HalfInt(d) for d in range(-5, 6, 2)]
    theta = 0.7
    d = np.array([[wigner_d_explicit(j, m1, m2, theta) for m2 in ms] for m1 in ms])
    np.testing.assert_allclose(d @ d.T, np.eye(len(ms)), atol=1e-13)


@pytest.mark.parametrize("s", [SPIN_UP, SPIN_DOWN])
@pytest.mark.parametrize("m_doubled", [-11, -3, -1, 1, 5, 11])
def test_wigner_table_matches_explicit(s, m_doubled):
    n_trunc = 6
    m = HalfInt(m_doubled)
    rule = gauss_legendre_rule(quadrature_size(n_trunc, 1))
    table = wigner_table(n_trunc, m, s, rule)
    theta = np.arccos(rule.nodes)
    expected = np.array(
        [
            math.sqrt((j.doubled + 1) / 2) * wigner_d_explicit(j, m, -s, theta)
            for j in table.j_values
        ]
    )
    np.testing.assert_allclose(table.values, expected, atol=1e-12)


@pytest.mark.parametrize("m_doubled", [1, -1, 19, -41, 79])
def test_wigner_table_orthonormal_n40(m_doubled):
    n_trunc = 40
    rule = gauss_legendre_rule(quadrature_size(n_trunc, 1))
    for s in (SPIN_UP, SPIN_DOWN):
        table = wigner_table(n_trunc, HalfInt(m_doubled), s, rule)
        assert table.size == n_trunc - (abs(m_doubled) - 1) // 2
        assert np.all(np.isfinite(table.values))
        assert orthonormality_residual(table, rule) <= 1e-12


def test_wigner_table_with_underflowing_seed():
    n_trunc = 120
    rule = gauss_legendre_rule(quadrature_size(n_trunc, 1))
    for m_doubled in (239, 201):
        table = wigner_table(n_trunc, HalfInt(m_doubled), SPIN_UP, rule)
        assert np.all(np.isfinite(table.values))
        assert orthonormality_residual(table, rule) <= 1e-12


def test_wigner_table_errors():
    rule = gauss_legendre_rule(quadrature_size(3, 1))
    with pytest.raises(ConfigError):
        wigner_table(3, HalfInt(7), SPIN_UP, rule)
    with pytest.raises(ConfigError):
        wigner_table(3, HalfInt(1), HalfInt(3), rule)
    with pytest.raises(ConfigError):
        wigner_table(3, HalfInt(1), SPIN_UP, gauss_legendre_rule(5))


def test_enumerate_block_order_and_size():
    block = enumerate_block(3, HalfInt(1))
    assert len(block) == 6
    assert [b.s for b in block] == [SPIN_UP] * 3 + [SPIN_DOWN] * 3
    assert [b.j.doubled for b in block[:3]] == [1, 3, 5]
    assert [b.d2_value for b in block[:3]] == [1, 4, 9]
    assert len(enumerate_block(3, HalfInt(5))) == 2
    with pytest.raises(ConfigError):
        enumerate_block(3, HalfInt(7))


@pytest.mark.parametrize("n_trunc", [1, 4, 9])
def test_dimension_and_multiplicities(n_trunc):
    states = [b for m in azimuthal_indices(n_trunc) for b in enumerate_block(n_trunc, m)]
    assert len(states) == 2 * n_trunc * (n_trunc + 1)
    for n in range(1, n_trunc + 1):
        assert sum(1 for b in states if b.level == n) == 4 * n


def test_basis_index_validation():
    assert BasisIndex(SPIN_UP, HalfInt(3), HalfInt(-1)).level == 2
    with pytest.raises(ConfigError):
        BasisIndex(HalfInt(3), HalfInt(3), HalfInt(1))
    with pytest.raises(ConfigError):
        BasisIndex(SPIN_UP, HalfInt(1), HalfInt(3))
    with pytest.raises(ConfigError):
        BasisIndex(SPIN_UP, HalfInt(4), HalfInt(2))
