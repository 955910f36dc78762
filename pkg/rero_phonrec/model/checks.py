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

"""Finite difference checks of every operation and variant."""

import os
from collections import OrderedDict

import numpy as np

from .api import VARIANT_WIRING, PhonemeRecognizer, VariantConfig
from .layers import ctc_loss_sum
from ..features.api import FeatureSchema, load_database
from ..numerics import ops
from ..numerics.gradcheck import grad_check
from ..numerics.tensor import Tensor, make
from ..training.records import Utterance
from ..utils import get_rng

#: Bundled toy feature database.
FIXTURE_DATABASE = os.path.join(
    os.path.dirname(os.path.dirname(__file__)), 'features', 'data',
    'fixture.csv')
#: Attributes of the micro recognizers.
MICRO_ATTRIBUTES = [
    'syllabic', 'sonorant', 'continuant', 'delayedRelease', 'nasal',
    'labial', 'coronal', 'strident', 'high', 'front',
    'periodicGlottalSource', 'spreadGlottis'
]


def micro_database():
    """Toy database restricted to a few attributes."""
    return load_database(FIXTURE_DATABASE, FeatureSchema.create(
        attribute_names=MICRO_ATTRIBUTES, excluded=[]))


def micro_config(variant, **kwargs):
    """Tiny recognizer architecture."""
    values = dict(variant=variant, input_dim=4, embedding_dim=4,
                  hidden_dim=5, layers=1, conv_context=2, conv_stride=1,
                  dropout=0.0, init_scale=0.5)
    values.update(kwargs)
    return VariantConfig(**values)


def micro_batch(rng, frames=8, input_dim=4):
    """Two utterances of the toy languages, one with an affricate."""
    return [
        Utterance(id='micro-1', language_id='aaa', phonemes=['p', 'a', 't'],
                  data=rng.normal(size=(frames, input_dim))),
        Utterance(id='micro-2', language_id='bbb', phonemes=['t͡s', 'a'],
                  data=rng.normal(size=(frames, input_dim))),
    ]


def variant_check(variant, seed=0, tol=1e-4, max_elements=None):
    """Check the batch loss gradient of a micro recognizer."""
    database = micro_database()
    model = PhonemeRecognizer(micro_config(variant), database,
                              ['aaa', 'bbb'], seed=seed)
    batch = micro_batch(get_rng(seed))
    return grad_check(
        lambda: model.forward_loss(batch, train_flag=False).total,
        model.store, tol=tol, max_elements=max_elements, seed=seed)


def _contract(x, weights):
    """Scalar ``sum(x * weights)``."""

    def backward(grad):
        return (grad * weights, )

    return make(np.asarray((x.data * weights).sum()), (x, ), backward,
                'contract')


def _param(rng, name, *shape):
    return Tensor(rng.normal(size=shape), requires_grad=True, name=name)


def op_checks(seed=0, tol=1e-4):
    """Check every differentiable operation on random inputs.

    Shapes are drawn from the seed as well, only the column layout of the
    segment, pooling and CTC cases is fixed.
    """
    rng = get_rng(seed)
    frames, rows_in, dim_in, dim_out, dim, phones, count, width = (
        int(value) for value in rng.integers(
            [3, 2, 2, 1, 2, 2, 2, 2], [6, 6, 5, 4, 9, 6, 5, 5]))
    x = _param(rng, 'x', rows_in, dim_in)
    W = _param(rng, 'W', dim_in, dim_out)
    b = _param(rng, 'b', dim_out)
    h = _param(rng, 'h', frames, dim)
    E = _param(rng, 'E', phones, dim)
    wide = _param(rng, 'wide', frames, 7)
    rows = [_param(rng, f'row{index}', width) for index in range(count)]
    bounds = [(0, 3), (3, 7)]
    index = rng.integers(0, count, size=(5, 2))
    mask_seed = int(rng.integers(1 << 30))

    def weights(shape):
        return np.random.default_rng(sum(shape)).normal(size=shape)

    def loss(out):
        return _contract(out, weights(out.shape))

    cases = OrderedDict([
        ('affine', (lambda: loss(ops.affine(x, W, b)), [x, W, b])),
        ('relu', (lambda: loss(ops.relu(x)), [x])),
        ('scaled_dot_scores', (lambda: loss(ops.scaled_dot_scores(h, E)),
                               [h, E])),
        ('softmax', (lambda: loss(ops.softmax(wide)), [wide])),
        ('log_softmax', (lambda: loss(ops.log_softmax(wide)), [wide])),
        ('segment_log_softmax', (
            lambda: loss(ops.segment_log_softmax(wide, bounds)), [wide])),
        ('segment_softmax', (
            lambda: loss(ops.segment_softmax(wide, bounds)), [wide])),
        ('maxpool_groups', (
            lambda: loss(ops.maxpool_groups(wide, [[0, 2], [1], [3, 4, 6]])),
            [wide])),
        ('concat_last', (lambda: loss(ops.concat_last([wide, h])),
                         [wide, h])),
        ('dropout', (lambda: loss(ops.dropout(
            wide, 0.3, np.random.default_rng(mask_seed), True)), [wide])),
        ('stack_rows', (lambda: loss(ops.stack_rows(rows)), rows)),
        ('gather_sum', (lambda: loss(ops.gather_sum(
            ops.stack_rows(rows), index)), rows)),
        ('take_columns', (lambda: loss(ops.take_columns(wide, [4, 0, 4])),
                          [wide])),
        ('unfold', (lambda: loss(ops.unfold(E, 2, 2)), [E])),
        ('weighted_sum', (lambda: ops.weighted_sum(
            [loss(x), loss(h)], [0.5, 2.0]), [x, h])),
        ('ctc', (lambda: ctc_loss_sum(
            ops.segment_log_softmax(wide, bounds), bounds,
            [[0], [1, 1]], [1.0, 0.5])[0], [wide])),
    ])
    return OrderedDict(
        (name, grad_check(f, params, tol=tol, seed=seed))
        for name, (f, params) in cases.items())


def run_gradchecks(seed=0, tol=1e-4, max_elements=None):
    """Reports of every operation and every variant."""
    reports = OrderedDict(
        (f'op.{name}', report)
        for name, report in op_checks(seed, tol).items())
    for variant in VARIANT_WIRING:
        reports[f'variant.{variant}'] = variant_check(
            variant, seed, tol, max_elements)
    return reports
