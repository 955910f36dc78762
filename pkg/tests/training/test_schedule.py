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

"""Test the learning rate schedule and language upsampling."""

from collections import OrderedDict

import numpy as np
import pytest

from rero_phonrec.config import FULL_PRESET, RunConfig
from rero_phonrec.training.api import ScheduleConfig, lr_at, \
    upsample_weights
from rero_phonrec.training.records import TrainingError


def test_schedule_knots():
    """Test warmup, plateau and decay values."""
    schedule = ScheduleConfig(peak_lr=1.0, warmup_steps=10,
                              constant_steps=20)
    assert lr_at(5, schedule) == 0.5
    assert lr_at(10, schedule) == 1.0
    assert lr_at(11, schedule) == 1.0
    assert lr_at(30, schedule) == 1.0
    assert abs(lr_at(31, schedule) - 1.0) < 0.02
    assert lr_at(120, schedule) == pytest.approx(0.5)
    assert lr_at(1, schedule) == 0.1
    with pytest.raises(ValueError):
        lr_at(0, schedule)


def test_full_schedule():
    """Test the peak lasts from the end of warmup to the decay."""
    config = RunConfig.load(preset='full')
    assert config['warmup_steps'] == FULL_PRESET['warmup_steps']
    schedule = ScheduleConfig.from_run_config(config)
    peak = schedule.peak_lr
    assert lr_at(2500, schedule) == peak
    assert lr_at(12500, schedule) == peak
    assert lr_at(2499, schedule) < peak
    assert lr_at(12501, schedule) < peak


def test_upsample_weights():
    """Test the sampling exponent."""
    assert np.allclose(upsample_weights([100, 400], 0.5), [1 / 3, 2 / 3])
    assert np.allclose(upsample_weights([100, 400], 1.0), [0.2, 0.8])
    assert np.allclose(upsample_weights([100, 400], 0.0), [0.5, 0.5])
    weights = upsample_weights(OrderedDict([('aaa', 9), ('bbb', 1)]), 0.5)
    assert list(weights) == ['aaa', 'bbb']
    assert weights['aaa'] == pytest.approx(0.75)
    with pytest.raises(TrainingError.EmptyLanguages):
        upsample_weights([], 0.5)
    with pytest.raises(TrainingError.EmptyLanguages):
        upsample_weights({'aaa': 0}, 0.5)
