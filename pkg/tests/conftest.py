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

"""Shared fixtures."""

import json

# pylint: disable=import-error
import pytest

from lindheat.lib.operators import DeformationConfig
from lindheat.lib.operators import ScalarDatum
from lindheat.lib.operators import assemble_blocks

# pylint: enable=import-error


@pytest.fixture
def cos_f():
    return ScalarDatum.cos_theta()


@pytest.fixture
def mixed_f():
    """f = P1 + P2/2."""
    return ScalarDatum((0.0, 1.0, 0.5))


@pytest.fixture(scope="session")
def blocks_n12():
    """Diagonalised blocks at N=12, gamma=0.5, f=cos(theta)."""
    return assemble_blocks(DeformationConfig(N=12, gamma=0.5))


@pytest.fixture(scope="session")
def free_blocks_n12():
    return assemble_blocks(DeformationConfig(N=12, gamma=0.0))


@pytest.fixture
def write_config(tmp_path):
    """Write a JSON run configuration and return its path."""

    def _write(**fields):
        fields.setdefault("output_dir", str(tmp_path / "out"))
        path = tmp_path / "run.json"
        path.write_text(json.dumps(fields), encoding="utf-8")
        return str(path)

    return _write
