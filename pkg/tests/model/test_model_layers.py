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

"""Test the recognizer layers."""

import numpy as np
import pytest

from rero_phonrec.ctc import ctc_loss
from rero_phonrec.features.api import AttributeValue, Contour, Segment
from rero_phonrec.model.checks import micro_config
from rero_phonrec.model.layers import AttributeEmbeddingTable, ModelError, \
    allophone_layer, compose_embeddings, conv_output_length, ctc_loss_sum, \
    encode, phone_logits
from rero_phonrec.numerics.ops import segment_log_softmax
from rero_phonrec.numerics.tensor import NumericsError, ParamStore, Tensor


def _table(micro_db, rng, zeroed=()):
    store = ParamStore()
    return AttributeEmbeddingTable(store, micro_db.schema, 4, rng, 0.5,
                                   zeroed)


def test_embedding_table(micro_db, rng):
    """Test one parameter per attribute value plus the blank."""
    table = _table(micro_db, rng, [('nasal', AttributeValue.ZERO)])
    assert len(table.store) == 12 * 3 + 1
    assert table.parameter_name('nasal', AttributeValue.PLUS) == \
        'embedding.nasal.+'
    assert table.store.is_frozen_zero('embedding.nasal.0')
    assert np.array_equal(table.store['embedding.nasal.0'].data,
                          np.zeros(4))
    assert table.rows().shape == (36, 4)
    assert table.blank.shape == (4, )
    index = table.index([micro_db.segment('t'), micro_db.segment('a')])
    assert index.shape == (2, 12)
    assert index[0, 0] == 1
    with pytest.raises(ModelError.UnknownAttributeValue):
        table.index([Segment('x', {})])


def test_composition_linearity(micro_db, rng):
    """Test changing one attribute value moves the row by the difference."""
    table = _table(micro_db, rng)
    stop = micro_db.segment('t')
    nasal = stop.with_ipa('t2')
    nasal.attributes['nasal'] = Contour.parse('+')
    rows = compose_embeddings([stop, nasal], table).data
    store = table.store
    expected = store['embedding.nasal.+'].data - \
        store['embedding.nasal.-'].data
    assert np.allclose(rows[1] - rows[0], expected, atol=1e-12)
    manual = sum(store[table.parameter_name(name, contour.first)].data
                 for name, contour in stop.attributes.items()
                 if name in micro_db.schema.effective)
    assert np.allclose(rows[0], manual)


def test_encoder(rng):
    """Test encoder output length and short inputs."""
    assert conv_output_length(5, 3, 2) == 2
    config = micro_config('baseline', conv_context=3, conv_stride=2)
    store = ParamStore()
    store.register('encoder.conv.weight', rng.normal(size=(12, 5)))
    store.register('encoder.conv.bias', np.zeros(5))
    store.register('encoder.layer0.weight', rng.normal(size=(5, 5)))
    store.register('encoder.layer0.bias', np.zeros(5))
    hidden = encode(store, Tensor(rng.normal(size=(5, 4))), config)
    assert hidden.shape == (2, 5)
    assert (hidden.data >= 0).all()
    with pytest.raises(ModelError.TooShort):
        encode(store, Tensor(rng.normal(size=(2, 4))), config)


def test_phone_logits():
    """Test scores of a one dimensional toy against hand values."""
    store = ParamStore()
    store.register('projection.weight', [[1.0]])
    store.register('projection.bias', [0.0])
    logits = phone_logits(store, Tensor([[2.0]]), Tensor([[3.0]]),
                          Tensor([0.5]))
    assert np.allclose(logits.data, [[6.0, 1.0]])
    with pytest.raises(NumericsError.ShapeMismatch):
        phone_logits(store, Tensor([[2.0]]), Tensor([[3.0]]), Tensor([0.5]),
                     attr_probs=Tensor([[0.5]]))


def test_allophone_layer():
    """Test pooled phoneme logits and the blank pass-through."""
    logits = Tensor([[1.0, 2.0, 0.5, -1.0]])
    pooled = allophone_layer(logits, [[0, 1], [2]])
    assert np.array_equal(pooled.data, [[2.0, 0.5, -1.0]])
    assert np.array_equal(allophone_layer(logits, [[0], [1], [2]]).data,
                          logits.data)


def test_ctc_loss_sum(rng):
    """Test weighted block losses."""
    bounds = [(0, 3), (3, 5)]
    log_probs = segment_log_softmax(
        Tensor(rng.normal(size=(4, 5)), requires_grad=True), bounds)
    total, losses = ctc_loss_sum(log_probs, bounds, [[0, 1], [0]],
                                 [1.0, 0.5])
    first = ctc_loss(log_probs.data[:, :3], [0, 1])[0]
    second = ctc_loss(log_probs.data[:, 3:], [0])[0]
    assert np.allclose(losses, [first, second])
    assert total.item() == pytest.approx(first + 0.5 * second)
