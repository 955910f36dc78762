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

"""Training loop, learning rate schedule and batch planning."""

import logging
import math
import os
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .io import read_checkpoint, write_checkpoint
from .records import TrainingError
from ..config import TRAINING_CONSTANT_STEPS, TRAINING_PEAK_LR, \
    TRAINING_WARMUP_STEPS, RunConfig
from ..evaluation.api import evaluate
from ..model.api import PhonemeRecognizer, VariantConfig
from ..numerics.optim import Adam
from ..utils import JsonLinesWriter, create_md5, get_rng

LOGGER = logging.getLogger(__name__)


@dataclass
class ScheduleConfig:
    """Linear warmup, constant, then inverse square root decay."""

    peak_lr: float = TRAINING_PEAK_LR
    warmup_steps: int = TRAINING_WARMUP_STEPS
    constant_steps: int = TRAINING_CONSTANT_STEPS

    @classmethod
    def from_run_config(cls, run_config):
        """Schedule of a RunConfig."""
        return cls(peak_lr=run_config['peak_lr'],
                   warmup_steps=run_config['warmup_steps'],
                   constant_steps=run_config['constant_steps'])


def lr_at(step, schedule):
    """Learning rate of a 1-based step."""
    if step < 1:
        raise ValueError(f'Steps start at 1: {step}')
    peak = schedule.peak_lr
    warmup = schedule.warmup_steps
    plateau = warmup + schedule.constant_steps
    if step <= warmup:
        return peak * (step / warmup)
    if step <= plateau:
        return peak
    return peak * math.sqrt(plateau / step)


def upsample_weights(counts, alpha):
    """Language sampling probabilities proportional to ``count ** alpha``.

    :param counts: language to utterance count mapping, or a sequence.
    :return: same container type with probabilities.
    """
    keys = list(counts) if isinstance(counts, dict) else None
    values = np.asarray([counts[key] for key in keys] if keys
                        else list(counts), dtype=np.float64)
    if not values.size or (values <= 0).any():
        raise TrainingError.EmptyLanguages(
            'Every language needs at least one utterance')
    weights = values ** alpha
    weights = weights / weights.sum()
    if keys:
        return OrderedDict(zip(keys, weights.tolist()))
    return weights


@dataclass
class BatchPlan:
    """Utterances trained together."""

    utterances: list = field(default_factory=list)

    @property
    def ids(self):
        """Utterance identifiers."""
        return [utterance.id for utterance in self.utterances]

    def footprint(self):
        """Padded matrix size in feature elements."""
        if not self.utterances:
            return 0
        shapes = [utterance.shape for utterance in self.utterances]
        return len(shapes) * max(rows for rows, _ in shapes) * \
            max(cols for _, cols in shapes)


def _footprint(shape):
    return shape[0] * shape[1]


def plan_batches(utterances, weights, budget, seed, skipped=None):
    """Endless deterministic stream of batches.

    Languages are drawn by weight, utterances without replacement within a
    language until its pool is exhausted. Batches grow until the next
    utterance would break the element budget.

    :param utterances: Utterance list.
    :param weights: language to probability mapping.
    :param budget: maximal padded batch size in feature elements.
    :param seed: random seed.
    :param skipped: list receiving the identifiers of utterances larger
        than the budget.
    """
    rng = get_rng(seed)
    shapes = {}
    pools = OrderedDict()
    for utterance in utterances:
        shape = utterance.shape
        if _footprint(shape) > budget:
            LOGGER.warning('utterance %s above the budget: %d > %d',
                           utterance.id, _footprint(shape), budget)
            if skipped is not None:
                skipped.append(utterance.id)
            continue
        shapes[utterance.id] = shape
        pools.setdefault(utterance.language_id, []).append(utterance)
    languages = [language for language in weights if language in pools]
    if not languages:
        if utterances:
            raise TrainingError.UtteranceTooLarge(
                f'No utterance fits a budget of {budget} elements')
        raise TrainingError.EmptyLanguages('No utterance to plan')
    probabilities = np.asarray([weights[language] for language in languages])
    probabilities = probabilities / probabilities.sum()
    queues = {language: [] for language in languages}

    def draw():
        language = languages[rng.choice(len(languages), p=probabilities)]
        queue = queues[language]
        if not queue:
            pool = pools[language]
            queue.extend(pool[index] for index in rng.permutation(len(pool)))
        return queue.pop()

    batch, rows, cols = [], 0, 0
    while True:
        utterance = draw()
        height, width = shapes[utterance.id]
        grown_rows, grown_cols = max(rows, height), max(cols, width)
        if batch and (len(batch) + 1) * grown_rows * grown_cols > budget:
            yield BatchPlan(batch)
            batch, grown_rows, grown_cols = [], height, width
        batch.append(utterance)
        rows, cols = grown_rows, grown_cols


def _round(array):
    return np.asarray(array, dtype=np.float32).astype(np.float64)


class Trainer(object):
    """Training run of a recognizer on utterances.

    Checkpoints hold parameters and optimizer moments as 32 bit floats; the
    in-memory values are rounded the same way when a checkpoint is written so
    that a resumed run continues exactly like the uninterrupted one.
    """

    def __init__(self, run_config, database, utterances, output_dir=None,
                 dev_utterances=None, logger=None):
        """Constructor.

        :param run_config: RunConfig.
        :param database: FeatureDatabase with the training inventories.
        :param utterances: training Utterance list.
        :param output_dir: directory for the metrics log and checkpoints.
        :param dev_utterances: utterances evaluated every ``eval_every``.
        :param logger: Logger for run messages.
        """
        self.run_config = run_config
        self.database = database
        self.utterances = utterances
        self.output_dir = output_dir
        self.dev_utterances = dev_utterances or []
        self.logger = logger
        self.seed = run_config['seed']
        self.schedule = ScheduleConfig.from_run_config(run_config)
        counts = OrderedDict()
        for utterance in utterances:
            counts[utterance.language_id] = counts.get(
                utterance.language_id, 0) + 1
        self.weights = upsample_weights(counts,
                                        run_config['upsampling_alpha'])
        input_dim = utterances[0].shape[1] if utterances else 0
        self.model = PhonemeRecognizer(
            VariantConfig.from_run_config(run_config, input_dim), database,
            list(counts), seed=self.seed)
        if run_config.get('freeze_frontend'):
            self.model.freeze_frontend()
        self.optimizer = Adam(self.model.store)
        self.rng = get_rng(self.seed + 1)
        self.step = 0
        self.too_large = []
        self.metrics = []
        self._batches = None

    @property
    def batches(self):
        """Batch stream positioned after the current step."""
        if self._batches is None:
            self._batches = plan_batches(
                self.utterances, self.weights,
                self.run_config['element_budget'], self.seed,
                self.too_large)
            for _ in range(self.step):
                next(self._batches)
        return self._batches

    def train_step(self):
        """One optimizer update.

        :return: metrics of the step.
        """
        plan = next(self.batches)
        self.step += 1
        lr = lr_at(self.step, self.schedule)
        self.model.store.zero_grad()
        report = self.model.forward_loss(plan.utterances, self.rng,
                                         train_flag=True)
        for utterance_id in report.skipped:
            self._log('warning', utterance_id, 'TargetTooLong',
                      'utterance skipped')
        if report.total is not None:
            report.total.backward()
            self.optimizer.step(lr)
        return {
            'step': self.step,
            'lr': lr,
            'total_loss': None if report.total is None
            else float(report.total.data),
            'losses': report.heads,
            'utterances': report.used,
            'skipped': len(report.skipped),
        }

    def run(self, max_steps=None, metrics_file=None):
        """Train up to ``max_steps`` updates.

        :return: list of step metrics.
        """
        max_steps = max_steps or self.run_config['max_steps']
        every = self.run_config.get('checkpoint_every') or 0
        eval_every = self.run_config.get('eval_every') or 0
        metrics = []
        writer = None
        if metrics_file or self.output_dir:
            metrics_file = metrics_file or os.path.join(
                self.output_dir, 'metrics.jsonl')
            writer = JsonLinesWriter(metrics_file,
                                     mode='a' if self.step else 'w')
        try:
            while self.step < max_steps:
                line = self.train_step()
                if eval_every and self.dev_utterances and \
                        self.step % eval_every == 0:
                    line['eval'] = self.evaluate_dev()
                metrics.append(line)
                if writer:
                    writer.write(line)
                if every and self.output_dir and self.step % every == 0:
                    self.save(self.checkpoint_path(self.step))
        finally:
            if writer:
                writer.close()
        if self.too_large:
            self._log('warning', '', 'UtteranceTooLarge',
                      f'{len(self.too_large)} utterances above the budget')
        return metrics

    def evaluate_dev(self):
        """PER and AER on the development utterances."""
        report = evaluate(self.model, self.dev_utterances, self.database)
        return {'per': report.macro_per, 'aer': report.aer}

    def checkpoint_path(self, step):
        """Checkpoint file name of a step."""
        return os.path.join(self.output_dir, f'checkpoint-{step:06d}.alph')

    def save(self, file_name):
        """Write a checkpoint, rounding the live state to 32 bit floats."""
        store = self.model.store
        for name, tensor in store.items():
            tensor.data = _round(tensor.data)
        optimizer_state = self.optimizer.state()
        self.optimizer.load_state({
            key: value if key == 'steps' else _round(value)
            for key, value in optimizer_state.items()})
        arrays = OrderedDict(store.state())
        arrays.update((key, value) for key, value in
                      self.optimizer.state().items() if key != 'steps')
        config = dict(self.run_config.to_plain())
        metadata = {
            'step': self.step,
            'optimizer_steps': self.optimizer.steps,
            'run_config': config,
            'config_md5': create_md5(config),
            'model': self.model.metadata(),
            'rng': self.rng.bit_generator.state,
        }
        write_checkpoint(file_name, metadata, arrays)
        self._log('info', self.step, 'checkpoint', file_name)
        return file_name

    @classmethod
    def resume(cls, file_name, database, utterances, output_dir=None,
               dev_utterances=None, logger=None):
        """Trainer continuing from a checkpoint."""
        metadata, arrays = read_checkpoint(file_name)
        trainer = cls(RunConfig(metadata['run_config']), database,
                      utterances, output_dir, dev_utterances, logger)
        trainer.load_arrays(metadata, arrays)
        return trainer

    def load_arrays(self, metadata, arrays):
        """Restore parameters, optimizer, random state and step."""
        self.model.store.load_state(arrays)
        state = {key: value for key, value in arrays.items()
                 if key.startswith('adam.')}
        state['steps'] = metadata['optimizer_steps']
        self.optimizer.load_state(state)
        self.rng.bit_generator.state = metadata['rng']
        self.step = metadata['step']
        self._batches = None

    def _log(self, level, identifier, code, message):
        if self.logger:
            self.logger.log_id(level, str(identifier), code, message)
        else:
            getattr(LOGGER, level)('%s %s %s', identifier, code, message)


def train(config, corpus, seed=None, output_dir=None, logger=None):
    """Train a recognizer on the training split of a corpus.

    :param config: RunConfig.
    :param corpus: object with ``database``, ``train`` and ``test``.
    :param seed: overrides the configuration seed.
    :return: the Trainer after the last step, metrics in ``metrics``.
    """
    if seed is not None:
        config = config.__class__(config)
        config['seed'] = seed
    trainer = Trainer(config, corpus.database, corpus.train, output_dir,
                      dev_utterances=getattr(corpus, 'test', None),
                      logger=logger)
    trainer.metrics = trainer.run()
    return trainer


def load_model(file_name, database):
    """Recognizer with the parameters of a checkpoint."""
    metadata, arrays = read_checkpoint(file_name)
    model = PhonemeRecognizer.from_metadata(metadata['model'], database)
    model.store.load_state(arrays)
    return model
