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

"""Module defining command line interface (CLI)."""

import functools
import logging
import os

# pylint: disable=import-error
# import click
import polars as pl
import rich_click as click
from rich.console import Console
from rich.logging import RichHandler

from . import actions
from .cli_flags import flg_verbose
from .cli_flags import opt_output_dir
from .cli_flags import requires_config
from .default import HELP_MAX_WIDTH
from .default import THEME
from .errors import ConfigError
from .errors import NumericalError
from .io import load_config
from .io import save_csv
from .io import save_json

# pylint: enable=import-error

EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _setup_logging(verbose: int):
    """Attach a RichHandler (on stderr) to the package logger."""
    logger = logging.getLogger("lindheat")
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        logger.addHandler(RichHandler(console=Console(stderr=True), show_path=False))
    logger.setLevel(max(logging.DEBUG, logging.WARNING - 10 * verbose))


def _exit_codes(fct):
    """Map library errors to exit codes, echoing the message to stderr."""

    @functools.wraps(fct)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return fct(*args, **kwargs)
        except ConfigError as exc:
            click.echo(str(exc), err=True)
            ctx.exit(EXIT_CONFIG)
        except NumericalError as exc:
            click.echo(str(exc), err=True)
            ctx.exit(EXIT_NUMERICAL)
        return None

    return wrapper


def _output_dir(config, output_dir):
    return output_dir if output_dir is not None else config.output_dir


@click.group(
    "cli",
    context_settings={"help_option_names": ["-h", "--help"]},
)
@click.pass_context
@click.rich_config(help_config={"theme": THEME, "max_width": HELP_MAX_WIDTH})
@flg_verbose
def cli(ctx, verbose):
    """Heat traces of the Lindblad-deformed Dirac operator on the two-sphere."""
    ctx.ensure_object(dict)
    _setup_logging(verbose)


@cli.command(short_help="""Eigenvalues of Q_gamma for every configured gamma
                  (one CSV per gamma).""")
@requires_config
@opt_output_dir
@_exit_codes
def spectrum(config_path, output_dir):
    """Write the block spectra of Q_gamma."""
    config = load_config(config_path)
    out = _output_dir(config, output_dir)
    for gamma, table in actions.cmd_spectrum(config).items():
        filename = os.path.join(out, f"spectrum_gamma{gamma:g}.csv")
        save_csv(filename, table)
        click.echo(filename)


@cli.command(short_help="""Heat traces K0, K_gamma, the Duhamel corrections, the remainder
                  and the truncation tail bound on the sigma grid (one CSV per gamma).""")
@requires_config
@opt_output_dir
@_exit_codes
def heat(config_path, output_dir):
    """Write heat traces and correction terms."""
    config = load_config(config_path)
    out = _output_dir(config, output_dir)
    for gamma, table in actions.cmd_heat(config).items():
        filename = os.path.join(out, f"heat_gamma{gamma:g}.csv")
        save_csv(filename, table)
        click.echo(filename)


@cli.command(short_help="""Effective spectral dimension of the free and deformed spectra
                  and its W2 projection (one CSV per gamma).""")
@requires_config
@opt_output_dir
@_exit_codes
def dseff(config_path, output_dir):
    """Write the effective spectral dimension."""
    config = load_config(config_path)
    out = _output_dir(config, output_dir)
    for gamma, table in actions.cmd_dseff(config).items():
        filename = os.path.join(out, f"dseff_gamma{gamma:g}.csv")
        save_csv(filename, table)
        click.echo(filename)


@cli.command(short_help="""Small-sigma fits: heat coefficients, the W2 constant,
                  C_W1W1 with its convergence study and gamma-order estimates (JSON).""")
@requires_config
@opt_output_dir
@_exit_codes
def fit(config_path, output_dir):
    """Write the fit report."""
    config = load_config(config_path)
    report = actions.cmd_fit(config)
    filename = os.path.join(_output_dir(config, output_dir), "fit.json")
    save_json(filename, report)
    click.echo(filename)
    heat_coef = report["heat_coefficients"]
    click.echo(f"c0 = {heat_coef['c0']:.10g}, c1 = {heat_coef['c1']:.10g}")
    if report["CW1W1"] is not None:
        cw1w1 = report["CW1W1"]
        click.echo(
            f"C_W1W1 = {cw1w1['limit']:.10g} +- {cw1w1['uncertainty']:.2e}"
            f" (converged: {cw1w1['converged']})"
        )


@cli.command(short_help="""Run all validation checks and negative controls. Exits with
                  code 1 if any check has an unexpected outcome.""")
@click.pass_context
@requires_config
@opt_output_dir
@_exit_codes
def validate(ctx, config_path, output_dir):
    """Run the validation suite."""
    config = load_config(config_path)
    reports, passed = actions.cmd_validate(config)
    filename = os.path.join(_output_dir(config, output_dir), "validation.json")
    save_json(
        filename,
        {"passed": passed, "checks": [r.as_dict() for r in reports]},
    )

    with pl.Config(tbl_rows=-1, tbl_cols=-1, fmt_str_lengths=80):
        click.echo(actions.reports_table(reports))
    click.echo(filename)

    if not passed:
        click.echo("ERROR: Validation failed!", err=True)
        ctx.exit(EXIT_VALIDATION)
