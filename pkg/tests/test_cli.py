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

import json

# pylint: disable=import-error
import numpy as np
import polars as pl
import pytest
from click.testing import CliRunner

from lindheat.lib import actions
from lindheat.lib import asymptotics
from lindheat.lib import cli
from lindheat.lib.errors import NumericalError

# pylint: enable=import-error

SMALL = {
    "truncation_N": 6,
    "gammas": [0.0, 0.4],
    "sigma": {"min": 0.2, "max": 2.0, "points_per_decade": 5},
    "fit": {"windows": [[0.2, 1.0], [0.5, 2.0]]},
}


@pytest.fixture
def runner():
    return CliRunner()


def test_spectrum(runner, write_config, tmp_path):
    result = runner.invoke(cli.cli, ["spectrum", "-c", write_config(**SMALL)])
    assert result.exit_code == 0, result.output
    free = pl.read_csv(tmp_path / "out" / "spectrum_gamma0.csv")
    deformed = pl.read_csv(tmp_path / "out" / "spectrum_gamma0.4.csv")
    assert free.columns == ["m", "index", "eigenvalue", "gamma"]
    assert len(free) == len(deformed) == 2 * 6 * 7
    values = free["eigenvalue"].to_numpy()
    np.testing.assert_allclose(values, np.rint(np.sqrt(values)) ** 2, atol=1e-10)
    assert not np.allclose(np.sort(values), np.sort(deformed["eigenvalue"].to_numpy()))


def test_output_dir_override(runner, write_config, tmp_path):
    target = tmp_path / "elsewhere"
    result = runner.invoke(cli.cli, ["spectrum", "-c", write_config(**SMALL), "-o", str(target)])
    assert result.exit_code == 0, result.output
    assert (target / "spectrum_gamma0.4.csv").exists()


def test_heat_is_deterministic(runner, write_config, tmp_path):
    path = write_config(**SMALL)
    outputs = []
    for name in ("first", "second"):
        result = runner.invoke(cli.cli, ["heat", "-c", path, "-o", str(tmp_path / name)])
        assert result.exit_code == 0, result.output
        outputs.append((tmp_path / name / "heat_gamma0.4.csv").read_bytes())
    assert outputs[0] == outputs[1]
    header = outputs[0].split(b"\n")[0]
    assert header == b"sigma,K0,Kgamma,delta1,delta2a,delta2b,remainder,tail_bound"
    table = pl.read_csv(tmp_path / "first" / "heat_gamma0.csv")
    np.testing.assert_allclose(table["Kgamma"], table["K0"], rtol=1e-13)
    assert (table["delta2b"] == 0).all()


def test_dseff(runner, write_config, tmp_path):
    result = runner.invoke(cli.cli, ["dseff", "-c", write_config(**SMALL)])
    assert result.exit_code == 0, result.output
    table = pl.read_csv(tmp_path / "out" / "dseff_gamma0.csv")
    np.testing.assert_allclose(table["dseff_gamma"], table["dseff_free"], rtol=1e-12)
    assert (table["dseff_w2_projection"] == 0).all()


@pytest.mark.parametrize(
    "fields", [{"gammas": []}, {"unknown": 1}, {"sigma": {"min": -1.0}}]
)
def test_invalid_config_exit_code(runner, write_config, fields):
    result = runner.invoke(cli.cli, ["spectrum", "-c", write_config(**{**SMALL, **fields})])
    assert result.exit_code == 2
    assert "ERROR" in result.output


def test_missing_config_option(runner):
    result = runner.invoke(cli.cli, ["heat"])
    assert result.exit_code == 2


def test_numerical_error_exit_code(runner, write_config, monkeypatch):
    def broken(config):
        raise NumericalError("ERROR: Eigensolver failed for matrix of size 3")

    monkeypatch.setattr(actions, "cmd_spectrum", broken)
    result = runner.invoke(cli.cli, ["spectrum", "-c", write_config(**SMALL)])
    assert result.exit_code == 3
    assert "Eigensolver failed" in result.output


def test_fit(runner, write_config, tmp_path):
    path = write_config(
        truncation_N=40,
        gammas=[0.5],
        sigma={"min": 0.01, "max": 1.0},
        fit={"windows": [[0.02, 0.06], [0.03, 0.1]], "degrees": [2, 3]},
    )
    result = runner.invoke(cli.cli, ["fit", "-c", path])
    assert result.exit_code == 0, result.output
    assert "C_W1W1 =" in result.output
    report = json.loads((tmp_path / "out" / "fit.json").read_text(encoding="utf-8"))
    assert set(report) == {
        "N",
        "f",
        "heat_coefficients",
        "delta2a_over_gamma4_limit",
        "sigma_tr_W1sq_limit",
        "coefficient_shift",
        "CW1W1",
        "gamma_order",
    }
    assert report["heat_coefficients"]["c0"] == pytest.approx(2.0, abs=1e-3)
    assert report["delta2a_over_gamma4_limit"]["limit"] == pytest.approx(0.1, abs=1e-3)
    floor = asymptotics.min_valid_truncation(0.02, 40)
    expected = sorted({max(24, floor), max(32, floor), 40})
    assert [c["N"] for c in report["CW1W1"]["components"]] == expected
    assert report["CW1W1"]["windows_used"] == [[0.02, 0.06], [0.03, 0.1]]
    assert report["gamma_order"]["gamma"] == 0.5


def test_fit_keeps_truncations_when_windows_allow(runner, write_config, tmp_path):
    windows = [[0.05, 0.15], [0.08, 0.25]]
    path = write_config(
        truncation_N=40,
        gammas=[0.5],
        sigma={"min": 0.01, "max": 1.0},
        fit={"windows": windows, "degrees": [2, 3]},
    )
    result = runner.invoke(cli.cli, ["fit", "-c", path])
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "out" / "fit.json").read_text(encoding="utf-8"))
    assert [c["N"] for c in report["CW1W1"]["components"]] == [24, 32, 40]
    assert report["CW1W1"]["windows_used"] == windows


def test_fit_rejects_windows_valid_only_at_n(runner, write_config, tmp_path):
    lo = asymptotics.min_valid_sigma(40) * (1.0 + 1e-6)
    path = write_config(
        truncation_N=40,
        gammas=[0.5],
        sigma={"min": 0.01, "max": 1.0},
        fit={"windows": [[lo, 3.0 * lo], [1.5 * lo, 5.0 * lo]]},
    )
    result = runner.invoke(cli.cli, ["fit", "-c", path])
    assert result.exit_code == 2
    assert "C_W1W1 needs two truncations" in result.output
    assert f"sigma={lo:.6g}" in result.output
    assert not (tmp_path / "out" / "fit.json").exists()


def test_fit_rejects_invalid_window(runner, write_config):
    path = write_config(
        truncation_N=10,
        gammas=[0.5],
        sigma={"min": 0.01, "max": 1.0},
        fit={"windows": [[0.02, 0.06], [0.03, 0.1]]},
    )
    result = runner.invoke(cli.cli, ["fit", "-c", path])
    assert result.exit_code == 2
    assert "tail rule" in result.output


def test_validate_passes(runner, write_config, tmp_path):
    path = write_config(truncation_N=1, gammas=[0.5], seed=4)
    result = runner.invoke(cli.cli, ["validate", "-c", path])
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "out" / "validation.json").read_text(encoding="utf-8"))
    assert report["passed"] is True
    assert all(check["ok"] for check in report["checks"])


def test_validate_failure_exit_code(runner, write_config, tmp_path):
    path = write_config(truncation_N=1, gammas=[0.5], tolerances={"clifford_trace": 0})
    result = runner.invoke(cli.cli, ["validate", "-c", path])
    assert result.exit_code == 1
    report = json.loads((tmp_path / "out" / "validation.json").read_text(encoding="utf-8"))
    assert report["passed"] is False
