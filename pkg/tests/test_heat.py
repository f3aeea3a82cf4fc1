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
from scipy import integrate

from lindheat.lib.errors import ConfigError
from lindheat.lib.errors import NumericalError
from lindheat.lib.heat import HeatSeries
from lindheat.lib.heat import SeriesLabel
from lindheat.lib.heat import correction_series
from lindheat.lib.heat import delta1
from lindheat.lib.heat import delta2a
from lindheat.lib.heat import delta2b
from lindheat.lib.heat import dseff
from lindheat.lib.heat import dseff_series
from lindheat.lib.heat import dseff_w2_projection
from lindheat.lib.heat import duhamel_F
from lindheat.lib.heat import duhamel_kernel
from lindheat.lib.heat import free_spectrum
from lindheat.lib.heat import heat_trace_deformed
from lindheat.lib.heat import heat_trace_free
from lindheat.lib.heat import k0_series
from lindheat.lib.heat import kgamma_series
from lindheat.lib.heat import phi2
from lindheat.lib.heat import phi2_array
from lindheat.lib.heat import sigma_grid
from lindheat.lib.heat import tail_bound

# pylint: enable=import-error


def test_free_trace_limits():
    assert heat_trace_free(50, 20.0) == pytest.approx(4 * math.exp(-20.0), rel=1e-12)
    assert 1e-4 * heat_trace_free(2000, 1e-4) == pytest.approx(2 - 1e-4 / 3, abs=1e-7)
    assert heat_trace_free(3, 1.0) == pytest.approx(
        4 * math.exp(-1) + 8 * math.exp(-4) + 12 * math.exp(-9), rel=1e-15
    )
    with pytest.raises(ConfigError):
        heat_trace_free(3, 0.0)


@pytest.mark.parametrize("n_trunc, sigma", [(10, 0.05), (30, 0.01), (5, 1.0), (60, 0.007)])
def test_tail_bound_is_an_upper_bound(n_trunc, sigma):
    n = np.arange(n_trunc + 1, n_trunc + 20000, dtype=float)
    tail = math.fsum(4 * n * np.exp(-sigma * n * n))
    bound = tail_bound(n_trunc, sigma)
    assert tail <= bound
    assert bound <= 10 * tail


def test_free_spectrum():
    spectrum = free_spectrum(3)
    np.testing.assert_array_equal(spectrum, [1.0] * 4 + [4.0] * 8 + [9.0] * 12)


def test_phi2_values():
    assert phi2(0.0) == 0.5
    assert phi2(1.0) == pytest.approx(math.e - 2, rel=1e-14)
    assert phi2(-1.0) == pytest.approx(1 / math.e, rel=1e-14)
    assert phi2(-50.0) == pytest.approx((math.exp(-50) + 49) / 2500, rel=1e-15)
    # continuity across the series switch
    assert phi2(0.05) == pytest.approx(phi2(0.0499999999), rel=1e-9)
    np.testing.assert_allclose(
        phi2_array([1e-4, -0.03, 0.049]),
        [(math.expm1(z) - z) / z**2 for z in (1e-4, -0.03, 0.049)],
        rtol=1e-7,
    )


def test_phi2_overflow():
    with pytest.raises(NumericalError):
        phi2(701.0)
    with pytest.raises(ConfigError):
        phi2(math.nan)


def test_duhamel_closed_forms():
    assert duhamel_F(1.0, 0.0, 1.0) == pytest.approx(1 - 2 / math.e, rel=1e-14)
    assert duhamel_F(3.0, 3.0, 0.2) == pytest.approx(0.5 * 0.04 * math.exp(-0.6), rel=1e-15)
    # large positive argument is rewritten around the smaller exponent
    value = duhamel_F(1e5, 1.0, 1.0)
    assert math.isfinite(value)
    assert value == pytest.approx(math.exp(-1.0) / (1e5 - 1.0) ** 2, rel=1e-4)


def _duhamel_quad(mu_a, mu_b, sigma):
    value, _ = integrate.dblquad(
        lambda r, s: math.exp(-(sigma - s + r) * mu_a - (s - r) * mu_b),
        0.0,
        sigma,
        0.0,
        lambda s: s,
        epsabs=0.0,
        epsrel=1e-12,
    )
    return value


def test_duhamel_against_quadrature():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        mu_a, mu_b = rng.uniform(1.0, 30.0, 2)
        sigma = rng.uniform(0.01, 0.5)
        assert duhamel_F(mu_a, mu_b, sigma) == pytest.approx(
            _duhamel_quad(mu_a, mu_b, sigma), rel=1e-8
        )


def test_duhamel_kernel_nonnegative():
    mu = np.linspace(1.0, 400.0, 60)
    grid_a, grid_b = np.meshgrid(mu, mu)
    for sigma in (1e-3, 0.1, 1.0, 5.0):
        values = duhamel_kernel(grid_a, grid_b, sigma)
        assert np.all(values >= 0)
        assert np.all(np.isfinite(values))


def test_delta1_vanishes(blocks_n12):
    for sigma in (0.01, 0.1, 1.0):
        assert delta1(blocks_n12, sigma) == 0.0


def test_delta1_detects_injected_diagonal(blocks_n12):
    eps = 1e-3
    injected = [b.replace_operators(w1=b.w1 + eps * np.eye(b.size)) for b in blocks_n12]
    sigma = 0.1
    expected = -(0.5**2) * sigma * eps * heat_trace_free(12, sigma)
    assert delta1(injected, sigma) == pytest.approx(expected, rel=1e-12)


def test_delta2_signs(blocks_n12):
    for sigma in (0.02, 0.2, 2.0):
        assert delta2b(blocks_n12, sigma) > 0
        assert delta2a(blocks_n12, sigma) < 0
    assert delta2b(blocks_n12, 0.1, gamma=0.0) == 0.0
    assert delta2b(blocks_n12, 0.1, gamma=1.0) == pytest.approx(
        delta2b(blocks_n12, 0.1) / 0.5**4, rel=1e-14
    )


def test_deformed_trace_reduces_to_free(free_blocks_n12):
    for sigma in (0.03, 0.3, 3.0):
        assert heat_trace_deformed(free_blocks_n12, sigma) == pytest.approx(
            heat_trace_free(12, sigma), rel=1e-13
        )


def test_deformed_trace_gamma_mismatch(blocks_n12):
    with pytest.raises(ConfigError):
        heat_trace_deformed(blocks_n12, 0.1, gamma=0.3)


def test_deformed_trace_monotone_and_log_convex(blocks_n12):
    grid = np.linspace(0.01, 3.0, 60)
    values = np.array([heat_trace_deformed(blocks_n12, s) for s in grid])
    assert np.all(np.diff(values) < 0)
    assert np.all(np.diff(np.log(values), 2) > -1e-12)


def test_dseff_single_eigenvalue():
    assert dseff(np.array([4.0]), 0.3) == pytest.approx(2.4, rel=1e-14)


def test_dseff_free_small_sigma():
    sigma = 0.005
    assert dseff(200, sigma) == pytest.approx(2 + sigma / 3, abs=1e-5)


def test_dseff_matches_finite_difference(blocks_n12):
    sigma, step = 0.2, 1e-5
    k_plus = heat_trace_deformed(blocks_n12, sigma * (1 + step))
    k_minus = heat_trace_deformed(blocks_n12, sigma * (1 - step))
    expected = -2 * (math.log(k_plus) - math.log(k_minus)) / (
        math.log(1 + step) - math.log(1 - step)
    )
    assert dseff(blocks_n12, sigma) == pytest.approx(expected, rel=1e-7)


def test_dseff_w2_projection_slope(cos_f):
    sigma, gamma = 0.01, 0.3
    shift = dseff_w2_projection(100, sigma, gamma, cos_f)
    assert shift / (gamma**4 * sigma) == pytest.approx(0.1, abs=5e-3)
    assert dseff_w2_projection(100, sigma, 0.0, cos_f) == 0.0


def test_series_builders(blocks_n12):
    grid = sigma_grid(0.05, 0.5, 10)
    k0 = k0_series(12, grid)
    kg = kgamma_series(blocks_n12, grid)
    d2b = correction_series(blocks_n12, grid, SeriesLabel.DELTA2B)
    ds = dseff_series(blocks_n12, grid, 12)
    for series in (k0, kg, d2b, ds):
        assert len(series) == len(grid)
        assert series.truncation == 12
    assert kg.label == SeriesLabel.KGAMMA
    assert kg.label.value == "Kgamma"
    np.testing.assert_array_equal(k0.tail_bounds, [tail_bound(12, s) for s in grid])
    with pytest.raises(ConfigError):
        correction_series(blocks_n12, grid, SeriesLabel.K0)


def test_heat_series_validation_and_restrict():
    series = HeatSeries(
        sigma_grid=[0.1, 0.2, 0.4],
        values=[3.0, 2.0, 1.0],
        tail_bounds=[0.0, 0.0, 0.0],
        label=SeriesLabel.K0,
        truncation=5,
    )
    sub = series.restrict(0.15, 0.4)
    np.testing.assert_array_equal(sub.sigma_grid, [0.2, 0.4])
    np.testing.assert_array_equal(sub.values, [2.0, 1.0])
    with pytest.raises(ValueError):
        series.values[0] = 1.0
    with pytest.raises(ConfigError):
        HeatSeries([0.2, 0.1], [1.0, 2.0], [0.0, 0.0], SeriesLabel.K0, 5)
    with pytest.raises(ConfigError):
        HeatSeries([0.1, 0.2], [1.0], [0.0, 0.0], SeriesLabel.K0, 5)
    with pytest.raises(NumericalError):
        HeatSeries([0.1, 0.2], [1.0, math.inf], [0.0, 0.0], SeriesLabel.K0, 5)
