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

"""Test deterministic batch planning."""

import itertools

import numpy as np
import pytest
import scipy.stats as st

from rero_phonrec.training.api import BatchPlan, plan_batches, \
    upsample_weights
from rero_phonrec.training.records import TrainingError, Utterance


def _utterance(id, language_id, frames, dim=4):
    return Utterance(id=id, language_id=language_id, phonemes=['a'],
                     data=np.zeros((frames, dim)))


def _corpus():
    return [_utterance(f'aaa-{n}', 'aaa', 10) for n in range(7)] + \
        [_utterance(f'bbb-{n}', 'bbb', 10) for n in range(5)]


def _ids(batches, count):
    return [plan.ids for plan in itertools.islice(batches, count)]


def test_equal_lengths():
    """Test a budget of two utterances gives pairs."""
    weights = {'aaa': 0.5, 'bbb': 0.5}
    batches = list(itertools.islice(
        plan_batches(_corpus(), weights, 80, seed=1), 30))
    assert all(len(plan.utterances) == 2 for plan in batches)
    assert all(plan.footprint() == 80 for plan in batches)
    assert BatchPlan().footprint() == 0


def test_determinism():
    """Test the same seed gives the same batches."""
    weights = {'aaa': 0.5, 'bbb': 0.5}
    first = _ids(plan_batches(_corpus(), weights, 120, seed=4), 50)
    assert first == _ids(plan_batches(_corpus(), weights, 120, seed=4), 50)
    assert first != _ids(plan_batches(_corpus(), weights, 120, seed=5), 50)


def test_language_pools():
    """Test utterances are drawn without replacement within a language."""
    batches = plan_batches(_corpus(), {'aaa': 1.0}, 40, seed=2)
    ids = [ids[0] for ids in _ids(batches, 14)]
    assert sorted(ids[:7]) == sorted(f'aaa-{n}' for n in range(7))
    assert sorted(ids[7:]) == sorted(ids[:7])


def test_budget_property():
    """Test every batch of random lengths fits the budget."""
    rng = np.random.default_rng(0)
    utterances = [
        _utterance(f'{language}-{n}', language,
                   int(rng.integers(3, 40)), int(rng.integers(2, 6)))
        for language in ('aaa', 'bbb', 'ccc') for n in range(30)]
    weights = {'aaa': 0.2, 'bbb': 0.3, 'ccc': 0.5}
    for plan in itertools.islice(
            plan_batches(utterances, weights, 400, seed=7), 10000):
        assert plan.utterances
        assert plan.footprint() <= 400


def test_oversize_utterances():
    """Test utterances above the budget are skipped and reported."""
    utterances = _corpus() + [_utterance('long', 'aaa', 30)]
    skipped = []
    batches = plan_batches(utterances, {'aaa': 0.5, 'bbb': 0.5}, 80,
                           seed=1, skipped=skipped)
    ids = {id for ids in _ids(batches, 40) for id in ids}
    assert skipped == ['long']
    assert 'long' not in ids
    with pytest.raises(TrainingError.UtteranceTooLarge):
        next(plan_batches(utterances, {'aaa': 1.0}, 10, seed=1))
    with pytest.raises(TrainingError.EmptyLanguages):
        next(plan_batches([], {'aaa': 1.0}, 10, seed=1))


def test_upsampled_frequencies():
    """Test drawn languages follow the upsampled weights."""
    counts = {'aaa': 100, 'bbb': 400, 'ccc': 25}
    weights = upsample_weights(counts, 0.5)
    utterances = [_utterance(f'{language}-{n}', language, 2, 2)
                  for language, count in counts.items()
                  for n in range(count)]
    draws = 100000
    observed = dict.fromkeys(counts, 0)
    for plan in itertools.islice(
            plan_batches(utterances, weights, 4, seed=9), draws):
        observed[plan.utterances[0].language_id] += 1
    _, p_value = st.chisquare(
        [observed[language] for language in counts],
        [weights[language] * draws for language in counts])
    assert p_value > 0.01
