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

"""Pytest configuration of the training tests."""

import dataclasses

import pytest

from rero_phonrec.config import RunConfig
from rero_phonrec.training.synth import LanguageSpec, load_spec, \
    synth_corpus


@pytest.fixture()
def tiny_spec():
    """Two training languages and a zero-shot language with a new stop."""
    return dataclasses.replace(
        load_spec(),
        languages=[
            LanguageSpec(id='sya', utterances=12,
                         phonemes=['p', 't', 'a', 'i'],
                         allophones={'t': ['t', 'tʰ']}, family='North'),
            LanguageSpec(id='syb', utterances=8,
                         phonemes=['t', 'k', 'a', 'u'], family='South'),
        ],
        zero_shot=LanguageSpec(id='syz', utterances=4,
                               phonemes=['b', 'a', 'u'], family='West'),
        frame_dim=6,
        phonemes_per_utterance=(2, 3),
        frames_per_segment=(2, 3),
        test_fraction=0.25,
    )


@pytest.fixture()
def tiny_corpus(tiny_spec):
    """Corpus of the tiny specification."""
    return synth_corpus(tiny_spec, seed=5)


@pytest.fixture()
def tiny_run_config():
    """Small and fast run configuration."""
    return RunConfig.load(
        seed=3, embedding_dim=8, hidden_dim=8, dropout=0.1,
        peak_lr=0.01, warmup_steps=2, constant_steps=4, max_steps=4,
        element_budget=300, checkpoint_every=2, eval_every=0)
