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

"""Test desk-scale training and zero-shot transfer on the default corpus.

Every recognizer trains for the default 2,000 steps, run these tests with
``pytest -m slow``.
"""

import pytest

from rero_phonrec.config import RunConfig
from rero_phonrec.evaluation.api import evaluate
from rero_phonrec.training.api import train
from rero_phonrec.training.synth import load_spec, synth_corpus

pytestmark = pytest.mark.slow

#: Training seeds of the variant comparison.
SEEDS = [0, 1, 2, 3, 4]


@pytest.fixture(scope='module')
def default_corpus():
    """Corpus of the bundled specification."""
    return synth_corpus(load_spec(), seed=0)


@pytest.fixture(scope='module')
def trained(default_corpus):
    """Recognizers of the default configuration, trained once per seed."""
    models = {}

    def model(variant, seed):
        if (variant, seed) not in models:
            run_config = RunConfig.load(variant=variant, seed=seed)
            models[variant, seed] = train(run_config, default_corpus).model
        return models[variant, seed]

    return model


def test_seen_languages(default_corpus, trained):
    """Test the multi-task recognizer on held out seen language speech."""
    report = evaluate(trained('multi-task', 0), default_corpus.test,
                      default_corpus.database)
    assert sorted(report.languages) == \
        sorted(default_corpus.training_languages)
    assert report.skipped == report.errors == 0
    assert report.pooled_per < 0.05


def test_zero_shot_against_control(default_corpus, trained):
    """Test zero-shot decoding beats the shuffled feature control."""
    model = trained('multi-task', 0)
    report = evaluate(model, default_corpus.zero_shot,
                      default_corpus.database)
    control = evaluate(model, default_corpus.zero_shot,
                       default_corpus.database, shuffle_seed=0)
    assert list(report.languages) == ['syz']
    assert report.pooled_per < 0.3
    assert report.pooled_per < control.pooled_per


def test_zero_shot_variants(default_corpus, trained):
    """Test multi-task transfers at least as well as baseline-shared."""
    wins = 0
    for seed in SEEDS:
        multi_task = evaluate(trained('multi-task', seed),
                              default_corpus.zero_shot,
                              default_corpus.database)
        shared = evaluate(trained('baseline-shared', seed),
                          default_corpus.zero_shot, default_corpus.database)
        wins += multi_task.pooled_per <= shared.pooled_per
    assert wins >= 4
