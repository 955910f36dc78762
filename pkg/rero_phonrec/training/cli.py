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

"""Click command-line interface for synthetic data and training."""

from __future__ import absolute_import, print_function

import os

import click

from .api import Trainer
from .records import TrainingError, read_manifest
from .synth import load_spec, novel_phonemes, synth_corpus, write_corpus
from ..features.api import FeatureDbError, FeatureSchema, load_database
from ..logger import Logger
from ..model.api import VARIANT_WIRING
from ..utils import create_md5, resolve_run_config, run_options


@click.command('synth-data')
@click.option('-o', '--out', 'out', required=True,
              type=click.Path(file_okay=False))
@click.option('-s', '--spec', 'spec_file',
              type=click.Path(exists=True, dir_okay=False),
              help='YAML corpus specification, bundled default otherwise.')
@run_options
@click.option('-v', '--verbose', 'verbose', is_flag=True, default=False)
@click.pass_context
def synth_data(ctx, out, spec_file, config_file, preset, seed, workers,
               verbose):
    """Generate a synthetic corpus.

    :param out: output directory.
    :param spec_file: corpus specification.
    :param verbose: Verbose.
    """
    run_config = resolve_run_config(config_file, preset, seed=seed,
                                    workers=workers)
    try:
        spec = load_spec(spec_file)
        corpus = synth_corpus(spec, run_config['seed'],
                              context=run_config['conv_context'])
    except TrainingError.SpecInvalid as err:
        click.secho(f'Invalid specification: {err}', fg='red', err=True)
        ctx.exit(1)
    paths = write_corpus(corpus, out)
    run_config.dump(os.path.join(out, 'config.yml'))
    click.secho(
        f'{len(corpus.train)} training, {len(corpus.test)} test and '
        f'{len(corpus.zero_shot)} zero-shot utterances written to {out}',
        fg='green')
    if verbose:
        for kind, path in paths.items():
            click.echo(f'{kind}\t{path}')
        if spec.zero_shot:
            click.echo(f'novel\t{" ".join(novel_phonemes(spec))}')


def load_run_database(ctx, db_file, run_config):
    """Feature database with the configured excluded attributes."""
    try:
        return load_database(
            db_file,
            schema_config=FeatureSchema.create(
                excluded=run_config['excluded_attributes']),
            strict=run_config['strict'])
    except (FeatureDbError.MalformedRow, FeatureDbError.UnknownValue,
            FeatureDbError.DanglingAllophone) as err:
        click.secho(f'Invalid database {db_file}: {err}', fg='red',
                    err=True)
        ctx.exit(1)


def read_manifest_or_exit(ctx, file_name):
    """Utterances of a manifest, exit with code 1 on format errors."""
    try:
        return read_manifest(file_name)
    except TrainingError.BadFormat as err:
        click.secho(f'Invalid manifest: {err}', fg='red', err=True)
        ctx.exit(1)


@click.command('train')
@click.option('-d', '--db', 'db_file', required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option('-t', '--train', 'train_manifest', required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option('--dev', 'dev_manifest',
              type=click.Path(exists=True, dir_okay=False),
              help='Utterances evaluated every --eval-every steps.')
@click.option('-o', '--out', 'out', required=True,
              type=click.Path(file_okay=False))
@click.option('--variant', 'variant', type=click.Choice(list(VARIANT_WIRING)))
@click.option('--max-steps', 'max_steps', type=int)
@click.option('--checkpoint-every', 'checkpoint_every', type=int)
@click.option('--eval-every', 'eval_every', type=int)
@click.option('--freeze-frontend', 'freeze_frontend', is_flag=True,
              default=False, help='Keep the convolution front-end fixed.')
@click.option('--resume', 'resume', type=click.Path(exists=True,
                                                      dir_okay=False),
              help='Continue from a checkpoint.')
@run_options
@click.option('-v', '--verbose', 'verbose', is_flag=True, default=False)
@click.pass_context
def train(ctx, db_file, train_manifest, dev_manifest, out, variant,
          max_steps, checkpoint_every, eval_every, freeze_frontend, resume,
          config_file, preset, seed, workers, verbose):
    """Train a recognizer.

    :param db_file: PHOIBLE style CSV file.
    :param train_manifest: training utterances.
    :param dev_manifest: development utterances.
    :param out: output directory for logs and checkpoints.
    :param resume: checkpoint to continue from.
    :param verbose: Verbose.
    """
    run_config = resolve_run_config(
        config_file, preset, seed=seed, workers=workers, variant=variant,
        max_steps=max_steps, checkpoint_every=checkpoint_every,
        eval_every=eval_every,
        freeze_frontend=True if freeze_frontend else None)
    database = load_run_database(ctx, db_file, run_config)
    utterances = read_manifest_or_exit(ctx, train_manifest)
    dev_utterances = read_manifest_or_exit(ctx, dev_manifest) \
        if dev_manifest else None
    os.makedirs(out, exist_ok=True)
    run_config.dump(os.path.join(out, 'config.yml'))
    with open(os.path.join(out, 'config.md5'), 'w') as md5_file:
        md5_file.write(create_md5(run_config.to_plain()) + '\n')
    logger = Logger(log_output_file=os.path.join(out, 'train.log'),
                    log_console=verbose)
    click.secho(f'Train {run_config["variant"]} on {len(utterances)} '
                f'utterances', fg='green')
    try:
        if resume:
            trainer = Trainer.resume(resume, database, utterances, out,
                                     dev_utterances, logger)
        else:
            trainer = Trainer(run_config, database, utterances, out,
                              dev_utterances, logger)
        metrics = trainer.run(max_steps=run_config['max_steps'])
        model_file = trainer.save(os.path.join(out, 'model.alph'))
    except (TrainingError.EmptyLanguages,
            TrainingError.UtteranceTooLarge,
            TrainingError.BadFormat) as err:
        click.secho(str(err), fg='red', err=True)
        ctx.exit(1)
    finally:
        logger.close()
    if metrics and metrics[-1]['total_loss'] is not None:
        click.secho(f'step {metrics[-1]["step"]}: loss '
                    f'{metrics[-1]["total_loss"]:.4f}', fg='green')
    click.secho(f'Model written to {model_file}', fg='green')
