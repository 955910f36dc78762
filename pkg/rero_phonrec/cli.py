# -*- coding: utf-8 -*-
#
# RERO PHONREC
# Copyright (C) 2023 RERO
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU Affero General Public License as published by
# the Free Software Foundation, version 3 of the License.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
# GNU Affero General Public License for more details.
#
# You should have received a copy of the GNU Affero General Public License
# along with this program. If not, see <http://www.gnu.org/licenses/>.

"""Click command-line interface of RERO PHONREC."""

from __future__ import absolute_import, print_function

import click

from .evaluation.cli import decode, evaluate_cli, report
from .features.cli import db, map_inventory_cli
from .model.checks import run_gradchecks
from .training.cli import synth_data, train
from .version import __version__


@click.group()
@click.version_option(__version__)
def cli():
    """Multilingual phoneme recognition with composed phoneme embeddings."""


@click.command('gradcheck')
@click.option('--seed', 'seed', type=int, default=0)
@click.option('--tol', 'tol', type=float, default=1e-4,
              help='Maximal relative error.')
@click.option('--max-elements', 'max_elements', type=int, default=None,
              help='Check a sample of elements per model parameter.')
@click.option('-v', '--verbose', 'verbose', is_flag=True, default=False)
@click.pass_context
def gradcheck(ctx, seed, tol, max_elements, verbose):
    """Compare analytic and finite difference gradients.

    :param seed: random seed of inputs and parameters.
    :param tol: maximal relative error.
    :param max_elements: elements checked per parameter.
    :param verbose: Verbose.
    """
    reports = run_gradchecks(seed=seed, tol=tol, max_elements=max_elements)
    failed = [name for name, check in reports.items() if not check.passed]
    for name, check in reports.items():
        if verbose or not check.passed:
            click.secho(f'{name}\t{check.max_relative_error:.3e}',
                        fg='green' if check.passed else 'red')
    if failed:
        click.secho(f'{len(failed)} of {len(reports)} checks failed',
                    fg='red', err=True)
        ctx.exit(1)
    click.secho(f'{len(reports)} checks passed', fg='green')


cli.add_command(db)
cli.add_command(map_inventory_cli)
cli.add_command(synth_data)
cli.add_command(train)
cli.add_command(decode)
cli.add_command(evaluate_cli)
cli.add_command(report)
cli.add_command(gradcheck)
