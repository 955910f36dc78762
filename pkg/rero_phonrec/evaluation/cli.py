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

"""Click command-line interface for decoding and evaluation."""

from __future__ import absolute_import, print_function

import csv

import click
import yaml

from .api import EvaluationError, evaluate, read_eval_csv, \
    read_languages_table, report_by_family, report_by_hours, \
    write_eval_csv
from ..features.api import FeatureDbError
from ..model.api import zero_shot_rebind
from ..model.layers import ModelError
from ..training.api import load_model
from ..training.cli import load_run_database, read_manifest_or_exit
from ..training.records import TrainingError
from ..utils import progressbar, resolve_run_config, run_options


def load_model_or_exit(ctx, checkpoint, database):
    """Recognizer of a checkpoint, exit with code 1 on format errors."""
    try:
        return load_model(checkpoint, database)
    except (TrainingError.BadFormat, KeyError) as err:
        click.secho(f'Invalid checkpoint {checkpoint}: {err}', fg='red',
                    err=True)
        ctx.exit(1)


@click.command('decode')
@click.option('-m', '--checkpoint', 'checkpoint', required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option('-d', '--db', 'db_file', required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option('-i', '--manifest', 'manifest', required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option('-o', '--out', 'out', type=click.File('w', encoding='utf-8'),
              default='-')
@run_options
@click.option('-v', '--verbose', 'verbose', is_flag=True, default=False)
@click.pass_context
def decode(ctx, checkpoint, db_file, manifest, out, config_file, preset,
           seed, workers, verbose):
    """Write greedy hypotheses as TSV: id, language, phonemes.

    :param checkpoint: trained recognizer.
    :param db_file: PHOIBLE style CSV file with the test inventories.
    :param manifest: utterances to decode.
    :param out: TSV output.
    :param verbose: Verbose.
    """
    run_config = resolve_run_config(config_file, preset, seed=seed,
                                    workers=workers)
    database = load_run_database(ctx, db_file, run_config)
    model = load_model_or_exit(ctx, checkpoint, database)
    utterances = read_manifest_or_exit(ctx, manifest)
    languages = sorted({utterance.language_id for utterance in utterances})
    try:
        model = zero_shot_rebind(model, languages, database)
        for utterance in progressbar(utterances, len(utterances), verbose):
            hypothesis = model.decode(utterance.frames, utterance.language_id)
            out.write(f'{utterance.id}\t{utterance.language_id}\t'
                      f'{" ".join(hypothesis)}\n')
    except (FeatureDbError.UnknownLanguage, ModelError.UnknownSegment,
            ModelError.TooShort) as err:
        click.secho(str(err), fg='red', err=True)
        ctx.exit(1)


@click.command('evaluate')
@click.option('-m', '--checkpoint', 'checkpoint', required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option('-d', '--db', 'db_file', required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option('-i', '--manifest', 'manifest', required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option('-l', '--languages', 'languages_file',
              type=click.File('r', encoding='utf-8'),
              help='TSV with language, family and hours columns.')
@click.option('--csv', 'csv_file', type=click.File('w', encoding='utf-8'),
              help='Per language CSV output.')
@click.option('-o', '--out', 'out', type=click.File('w', encoding='utf-8'),
              default='-', help='YAML report output.')
@click.option('--shuffled-control', 'shuffled', is_flag=True, default=False,
              help='Bind shuffled attribute vectors, a zero-shot control.')
@run_options
@click.pass_context
def evaluate_cli(ctx, checkpoint, db_file, manifest, languages_file,
                 csv_file, out, shuffled, config_file, preset, seed,
                 workers):
    """Phoneme and attribute error rates of a recognizer.

    :param checkpoint: trained recognizer.
    :param db_file: PHOIBLE style CSV file with the test inventories.
    :param manifest: utterances to evaluate.
    :param languages_file: language families and training hours.
    :param csv_file: per language CSV output.
    :param out: YAML report output.
    :param shuffled: score the shuffled feature control, seeded by the
        run seed.
    """
    run_config = resolve_run_config(config_file, preset, seed=seed,
                                    workers=workers)
    database = load_run_database(ctx, db_file, run_config)
    model = load_model_or_exit(ctx, checkpoint, database)
    utterances = read_manifest_or_exit(ctx, manifest)
    table = read_languages_table(languages_file) if languages_file else None
    try:
        report = evaluate(model, utterances, database,
                          languages_table=table,
                          workers=run_config['workers'],
                          shuffle_seed=run_config['seed'] if shuffled
                          else None)
    except (FeatureDbError.UnknownLanguage, ModelError.UnknownSegment,
            EvaluationError.EmptyLanguage) as err:
        click.secho(str(err), fg='red', err=True)
        ctx.exit(1)
    yaml.safe_dump(report.to_dict(), out, sort_keys=True,
                   allow_unicode=True)
    if csv_file:
        write_eval_csv(report, csv_file)
    if report.macro_per is None:
        click.secho(f'No utterance decoded, {report.skipped} skipped, '
                    f'{report.errors} errors', fg='yellow', err=True)
    else:
        click.secho(f'PER {report.macro_per:.2%} over '
                    f'{len(report.languages)} languages, '
                    f'{report.skipped} skipped, {report.errors} errors',
                    fg='yellow' if report.errors else 'green', err=True)


@click.command('report')
@click.option('-e', '--eval', 'eval_file', required=True,
              type=click.File('r', encoding='utf-8'))
@click.option('-b', '--baseline', 'baseline_file',
              type=click.File('r', encoding='utf-8'),
              help='Per language CSV of the system to compare with.')
@click.option('--by', 'by', type=click.Choice(['family', 'hours']),
              default='family')
@click.option('-o', '--out', 'out', type=click.File('w', encoding='utf-8'),
              default='-')
@click.pass_context
def report(ctx, eval_file, baseline_file, by, out):
    """Aggregate per language results by family or training hours.

    :param eval_file: per language CSV written by evaluate.
    :param baseline_file: per language CSV of another system.
    :param by: family or hours.
    :param out: CSV output.
    """
    try:
        rows = read_eval_csv(eval_file)
        baseline = read_eval_csv(baseline_file) if baseline_file else None
    except (KeyError, ValueError) as err:
        click.secho(f'Invalid evaluation CSV: {err}', fg='red', err=True)
        ctx.exit(1)
    writer = csv.writer(out, lineterminator='\n')
    if by == 'family':
        writer.writerow(['family', 'languages', 'per', 'delta'])
        lines = report_by_family(rows, baseline)
    else:
        writer.writerow(['language', 'hours', 'per', 'delta'])
        lines = report_by_hours(rows, baseline)
    for line in lines:
        writer.writerow([_cell(value) for value in line])


def _cell(value):
    if value is None:
        return ''
    if isinstance(value, float):
        return f'{value:.6f}'
    return value
