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

"""Pytest configuration."""

import numpy as np
import pytest
import yaml

from rero_phonrec.features.api import load_database
from rero_phonrec.model.checks import FIXTURE_DATABASE, micro_database
from rero_phonrec.training.synth import DEFAULT_SPEC


@pytest.fixture(scope='session')
def fixture_db_file():
    """Bundled toy feature database file."""
    return FIXTURE_DATABASE


@pytest.fixture(scope='session')
def fixture_db(fixture_db_file):
    """Bundled toy feature database."""
    return load_database(fixture_db_file)


@pytest.fixture(scope='session')
def micro_db():
    """Toy database with a dozen attributes."""
    return micro_database()


@pytest.fixture()
def rng():
    """Seeded random generator."""
    return np.random.default_rng(1234)


@pytest.fixture(scope='session')
def tiny_spec_file(tmpdir_factory):
    """Bundled corpus specification shrunk to two tiny languages."""
    with open(DEFAULT_SPEC, encoding='utf-8') as handle:
        data = yaml.safe_load(handle)
    data.update(
        languages=[
            {'id': 'sya', 'name': 'Synthetic A', 'family': 'North',
             'utterances': 12, 'phonemes': ['p', 't', 'a', 'i'],
             'allophones': {'t': ['t', 'tʰ']}},
            {'id': 'syb', 'name': 'Synthetic B', 'family': 'South',
             'utterances': 8, 'phonemes': ['t', 'k', 'a', 'u']},
        ],
        zero_shot={'id': 'syz', 'name': 'Synthetic Z', 'family': 'West',
                   'utterances': 4, 'phonemes': ['b', 'a', 'u']},
        frame_dim=6, phonemes_per_utterance=[2, 3],
        frames_per_segment=[2, 3], test_fraction=0.25)
    spec_file = tmpdir_factory.mktemp('spec').join('tiny.yml')
    spec_file.write_text(yaml.safe_dump(data, allow_unicode=True),
                         encoding='utf-8')
    return str(spec_file)


@pytest.fixture(scope='session')
def tiny_config_file(tmpdir_factory):
    """Small and fast run configuration file."""
    config_file = tmpdir_factory.mktemp('config').join('run.yml')
    config_file.write_text(yaml.safe_dump({
        'seed': 3, 'embedding_dim': 8, 'hidden_dim': 8, 'dropout': 0.1,
        'peak_lr': 0.01, 'warmup_steps': 2, 'constant_steps': 4,
        'max_steps': 4, 'element_budget': 300, 'checkpoint_every': 2,
        'eval_every': 0}), encoding='utf-8')
    return str(config_file)
