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

"""Click command-line interface for feature databases."""

from __future__ import absolute_import, print_function

import click

from .api import FeatureDbError, attribute_value_census, feature_table, \
    load_database, missing_attribute_values
from .mapping import map_inventory, write_mapping_tsv
from .validation import validate
from ..utils import nfd


def load_or_exit(ctx, db_file, strict=False):
    """Load a database, exit with code 1 on parse errors."""
    try:
        return load_database(db_file, strict=strict)
    except FeatureDbError.MalformedRow as err:
        click.secho(f'Malformed database {db_file}: {err}', fg='red',
                    err=True)
        ctx.exit(1)
    except (FeatureDbError.UnknownValue,
            FeatureDbError.DanglingAllophone) as err:
        click.secho(f'Invalid database {db_file}: {err}', fg='red',
                    err=True)
        ctx.exit(1)


@click.group()
def db():
    """Feature database commands."""


@db.command('validate')
@click.argument('db_file', type=click.Path(exists=True, dir_okay=False))
@click.option('-s', '--strict', 'strict', is_flag=True, default=False,
              help='Dangling allophones are errors.')
@click.option('-v', '--verbose', 'verbose', is_flag=True, default=False)
@click.pass_context
def validate_db(ctx, db_file, strict, verbose):
    """Validate a feature database.

    :param db_file: PHOIBLE style CSV file.
    :param strict: dangling allophones are errors.
    :param verbose: Verbose.
    """
    database = load_or_exit(ctx, db_file, strict)
    report = validate(database)
    if report:
        click.echo(report.render_lines())
    if verbose:
        click.secho(
            f'{len(database.segments)} segments, '
            f'{len(database.inventories)} inventories', fg='green')
    if report.errors:
        click.secho(f'{len(report.errors)} errors', fg='red', err=True)
        ctx.exit(1)
    color = 'yellow' if report.warnings else 'green'
    click.secho(f'Valid: {len(report.warnings)} warnings', fg=color,
                err=True)


@db.command('features')
@click.argument('ipa')
@click.option('-d', '--db', 'db_file', required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def features(ctx, ipa, db_file):
    """Print the attribute contours of a segment.

    :param ipa: segment IPA string.
    :param db_file: PHOIBLE style CSV file.
    """
    database = load_or_exit(ctx, db_file)
    try:
        segment = database.segment(ipa)
    except FeatureDbError.UnknownSegment as err:
        click.secho(str(err), fg='red', err=True)
        ctx.exit(1)
    for name, contour, excluded in feature_table(segment, database.schema):
        click.echo(f'{name}\t{contour}' + ('\texcluded' if excluded else ''))


@db.command('census')
@click.option('-d', '--db', 'db_file', required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option('-l', '--languages', 'languages', required=True,
              help='Comma separated training language identifiers.')
@click.pass_context
def census(ctx, db_file, languages):
    """Print attribute values missing from the training languages.

    :param db_file: PHOIBLE style CSV file.
    :param languages: training language identifiers.
    """
    database = load_or_exit(ctx, db_file)
    language_ids = [language.strip() for language in languages.split(',')
                    if language.strip()]
    try:
        attested = attribute_value_census(database, language_ids)
        missing = missing_attribute_values(database, language_ids)
    except FeatureDbError.UnknownLanguage as err:
        click.secho(str(err), fg='red', err=True)
        ctx.exit(1)
    click.secho(f'{len(attested)} attested attribute values', fg='green')
    for name, value in missing:
        click.echo(f'missing\t{name}\t{value.render()}')


@click.command('map-inventory')
@click.option('-d', '--db', 'db_file', required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option('-s', '--source', 'source', required=True,
              type=click.File('r', encoding='utf-8'),
              help='Phonemes to map, whitespace separated.')
@click.option('-t', '--target-lang', 'target_lang', required=True)
@click.option('-o', '--out', 'out', type=click.File('w', encoding='utf-8'),
              default='-')
@click.pass_context
def map_inventory_cli(ctx, db_file, source, target_lang, out):
    """Map phonemes onto the inventory of a language.

    :param db_file: PHOIBLE style CSV file.
    :param source: file with the phonemes to map.
    :param target_lang: language of the target inventory.
    :param out: TSV output.
    """
    database = load_or_exit(ctx, db_file)
    ipas = []
    for ipa in source.read().split():
        if nfd(ipa) not in ipas:
            ipas.append(nfd(ipa))
    try:
        target = database.inventory(target_lang)
        segments = [database.segment(ipa) for ipa in ipas]
        result = map_inventory(segments, target, database)
    except (FeatureDbError.UnknownLanguage, FeatureDbError.UnknownSegment,
            FeatureDbError.EmptyTarget) as err:
        click.secho(str(err), fg='red', err=True)
        ctx.exit(1)
    write_mapping_tsv(result, out)
    click.secho(
        f'coverage {result.coverage:.2%}, '
        f'retained only {result.retained_coverage:.2%}, '
        f'{len(result.unmapped)} unmapped', fg='green', err=True)
