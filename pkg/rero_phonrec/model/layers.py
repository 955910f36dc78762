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

"""Network layers of the phoneme recognizer.

Every layer reads its parameters from a :class:`ParamStore` by name.
"""

import numpy as np

from ..ctc import ctc_losses
from ..features.api import ATTRIBUTE_VALUES
from ..numerics.ops import affine, concat_last, dropout, gather_sum, \
    maxpool_groups, relu, scaled_dot_scores, segment_log_softmax, \
    segment_softmax, stack_rows, unfold
from ..numerics.tensor import NumericsError, make


class ModelError:
    """Base class for errors in the model."""

    class UnknownAttributeValue(Exception):
        """Attribute value without embedding."""

    class TooShort(Exception):
        """Fewer input frames than the convolution context."""

    class UnknownSegment(Exception):
        """Transcription symbol outside of the phone space."""


def init_weight(rng, rows, cols, scale):
    """Gaussian weight matrix."""
    return rng.normal(0.0, scale, size=(rows, cols))


class AttributeEmbeddingTable(object):
    """One embedding vector per attribute value, plus the blank embedding.

    Values listed as zeroed are frozen-to-zero parameters.
    """

    def __init__(self, store, schema, dim, rng, scale, zeroed=()):
        """Constructor.

        :param store: ParamStore receiving the parameters.
        :param schema: FeatureSchema, only effective attributes are used.
        :param dim: embedding size.
        :param zeroed: iterable of (attribute, AttributeValue) pairs.
        """
        self.store = store
        self.schema = schema
        self.dim = dim
        zeroed = set(zeroed)
        self.names = []
        for attribute in schema.effective:
            for value in ATTRIBUTE_VALUES:
                name = self.parameter_name(attribute, value)
                store.register(name, rng.normal(0.0, scale, size=dim),
                               frozen_zero=(attribute, value) in zeroed)
                self.names.append(name)
        store.register('embedding.blank', rng.normal(0.0, scale, size=dim))

    @staticmethod
    def parameter_name(attribute, value):
        """Parameter name of an attribute value, e.g. ``embedding.nasal.+``."""
        return f'embedding.{attribute}.{value.label}'

    @property
    def blank(self):
        """Blank embedding."""
        return self.store['embedding.blank']

    def rows(self):
        """Every attribute value embedding as one [A * 3, D] tensor."""
        return stack_rows([self.store[name] for name in self.names])

    def index(self, segments):
        """Row indices of the first values of segments, [P, A]."""
        width = len(ATTRIBUTE_VALUES)
        index = np.empty((len(segments), len(self.schema.effective)),
                         dtype=np.int64)
        for row, segment in enumerate(segments):
            for column, attribute in enumerate(self.schema.effective):
                try:
                    value = segment.attributes[attribute].first
                    index[row, column] = column * width + \
                        ATTRIBUTE_VALUES.index(value)
                except (KeyError, ValueError):
                    raise ModelError.UnknownAttributeValue(
                        f'{segment.ipa}: no embedding for {attribute}')
        return index


def compose_embeddings(segments, table):
    """Phone embeddings as sums of attribute value embeddings, [P, D]."""
    return gather_sum(table.rows(), table.index(segments))


def conv_output_length(frames, context, stride):
    """Frames left after the convolution front-end."""
    return (frames - context) // stride + 1


def encode(store, frames, config, rng=None, train_flag=False):
    """Toy acoustic encoder, convolution then feed-forward layers.

    :param frames: Tensor[T0, F]
    :return: Tensor[T, H]
    """
    if frames.shape[0] < config.conv_context:
        raise ModelError.TooShort(
            f'{frames.shape[0]} frames for a context of '
            f'{config.conv_context}')
    hidden = unfold(frames, config.conv_context, config.conv_stride)
    hidden = relu(affine(hidden, store['encoder.conv.weight'],
                         store['encoder.conv.bias']))
    for layer in range(config.layers):
        hidden = relu(affine(hidden, store[f'encoder.layer{layer}.weight'],
                             store[f'encoder.layer{layer}.bias']))
    return dropout(hidden, config.dropout, rng, train_flag)


def attribute_heads(store, hidden, bounds):
    """Fused attribute classifiers.

    :param bounds: column blocks, one per attribute, blank last in each.
    :return: logits and log distributions, both [T, sum of widths].
    """
    logits = affine(hidden, store['heads.weight'], store['heads.bias'])
    return logits, segment_log_softmax(logits, bounds)


def attribute_probabilities(logits, bounds):
    """Per attribute distributions for the hierarchical connection."""
    return segment_softmax(logits, bounds)


def phone_logits(store, hidden, embeddings, blank, attr_probs=None):
    """Scaled dot product scores against phones and the blank, [T, P + 1]."""
    if attr_probs is not None:
        hidden = concat_last([hidden, attr_probs])
    if hidden.shape[1] != store['projection.weight'].shape[0]:
        raise NumericsError.ShapeMismatch(
            f'projection expects {store["projection.weight"].shape[0]} '
            f'columns, got {hidden.shape[1]}')
    projected = affine(hidden, store['projection.weight'],
                       store['projection.bias'])
    return scaled_dot_scores(projected,
                             stack_rows_with_blank(embeddings, blank))


def stack_rows_with_blank(embeddings, blank):
    """Append the blank embedding as last row."""
    count = embeddings.shape[0]

    def backward(grad):
        return grad[:count], grad[count]

    return make(np.vstack([embeddings.data, blank.data[None, :]]),
                (embeddings, blank), backward, 'with_blank')


def allophone_layer(logits, groups):
    """Phoneme logits as maxima over allophone logits.

    The blank column, the last one, passes through unchanged.
    """
    blank = logits.shape[1] - 1
    return maxpool_groups(logits, list(groups) + [[blank]])


def ctc_loss_sum(log_probs, bounds, targets, weights):
    """Weighted sum of CTC losses of column blocks sharing frames.

    :param log_probs: Tensor[T, W] of log distributions, blank last in
        every block.
    :param bounds: list of (start, end) blocks.
    :param targets: one label sequence per block.
    :param weights: one weight per block.
    :return: scalar Tensor and the individual losses.
    """
    blocks = [log_probs.data[:, start:end] for start, end in bounds]
    losses, grads = ctc_losses(blocks, targets)
    weights = np.asarray(weights, dtype=np.float64)

    def backward(grad):
        result = np.zeros_like(log_probs.data)
        for (start, end), block, weight in zip(bounds, grads, weights):
            result[:, start:end] = grad * weight * block
        return (result, )

    return make(np.asarray(float(weights @ losses)), (log_probs, ),
                backward, 'ctc'), losses
