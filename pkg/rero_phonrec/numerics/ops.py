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

"""Differentiable operations of the recognizer."""

import math

import numpy as np

from .tensor import NumericsError, Tensor, make


def _check_finite(x):
    if np.isnan(x.data).any():
        raise NumericsError.NaNInput('NaN in input')


def affine(x, W, b):
    """Affine map ``xW + b`` of a [T, H] input."""
    if x.data.ndim != 2 or W.data.ndim != 2 or b.data.ndim != 1 \
            or x.shape[1] != W.shape[0] or W.shape[1] != b.shape[0]:
        raise NumericsError.ShapeMismatch(
            f'affine: x{x.shape} W{W.shape} b{b.shape}')

    def backward(grad):
        return grad @ W.data.T, x.data.T @ grad, grad.sum(axis=0)

    return make(x.data @ W.data + b.data, (x, W, b), backward, 'affine')


def relu(x):
    """Rectified linear unit."""
    mask = x.data > 0

    def backward(grad):
        return (grad * mask, )

    return make(x.data * mask, (x, ), backward, 'relu')


def scaled_dot_scores(h, E):
    """Scores ``h E^T / sqrt(D)`` of [T, D] queries against [P, D] rows."""
    if h.data.ndim != 2 or E.data.ndim != 2 or h.shape[1] != E.shape[1]:
        raise NumericsError.ShapeMismatch(
            f'scaled_dot_scores: h{h.shape} E{E.shape}')
    scale = 1.0 / math.sqrt(h.shape[1])

    def backward(grad):
        return grad @ E.data * scale, grad.T @ h.data * scale

    return make(h.data @ E.data.T * scale, (h, E), backward, 'scores')


def _softmax(data):
    shifted = data - data.max(axis=-1, keepdims=True)
    exps = np.exp(shifted)
    return exps / exps.sum(axis=-1, keepdims=True)


def _log_softmax(data):
    shifted = data - data.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax(x):
    """Softmax over the last dimension."""
    _check_finite(x)
    out = _softmax(x.data)

    def backward(grad):
        return (out * (grad - (grad * out).sum(axis=-1, keepdims=True)), )

    return make(out, (x, ), backward, 'softmax')


def log_softmax(x):
    """Log softmax over the last dimension, max subtraction stabilized."""
    _check_finite(x)
    out = _log_softmax(x.data)

    def backward(grad):
        return (grad - np.exp(out) * grad.sum(axis=-1, keepdims=True), )

    return make(out, (x, ), backward, 'log_softmax')


def _segments(x, bounds):
    if not bounds or bounds[0][0] != 0 or bounds[-1][1] != x.shape[-1] \
            or any(a[1] != b[0] for a, b in zip(bounds, bounds[1:])):
        raise NumericsError.ShapeMismatch(
            f'segments {bounds} do not tile {x.shape[-1]} columns')


def segment_log_softmax(x, bounds):
    """Log softmax applied to consecutive column blocks.

    :param bounds: list of (start, end) column blocks tiling the input.
    """
    _check_finite(x)
    _segments(x, bounds)
    out = np.concatenate(
        [_log_softmax(x.data[:, start:end]) for start, end in bounds],
        axis=-1)

    def backward(grad):
        result = np.empty_like(grad)
        for start, end in bounds:
            block = grad[:, start:end]
            result[:, start:end] = block - np.exp(out[:, start:end]) * \
                block.sum(axis=-1, keepdims=True)
        return (result, )

    return make(out, (x, ), backward, 'segment_log_softmax')


def segment_softmax(x, bounds):
    """Softmax applied to consecutive column blocks."""
    _check_finite(x)
    _segments(x, bounds)
    out = np.concatenate(
        [_softmax(x.data[:, start:end]) for start, end in bounds], axis=-1)

    def backward(grad):
        result = np.empty_like(grad)
        for start, end in bounds:
            block, probs = grad[:, start:end], out[:, start:end]
            result[:, start:end] = probs * (
                block - (block * probs).sum(axis=-1, keepdims=True))
        return (result, )

    return make(out, (x, ), backward, 'segment_softmax')


def maxpool_groups(x, groups):
    """Maximum of column groups of a [T, P] input.

    The gradient goes to the arg max, the lowest index on ties.
    """
    width = x.shape[1]
    columns = []
    for group in groups:
        group = sorted(group)
        if not group:
            raise NumericsError.EmptyGroup('empty pooling group')
        if group[0] < 0 or group[-1] >= width:
            raise NumericsError.IndexOutOfRange(
                f'pooling index out of range for {width} columns')
        columns.append(np.asarray(group, dtype=np.int64))
    rows = np.arange(x.shape[0])
    argmax = np.stack(
        [group[np.argmax(x.data[:, group], axis=1)] for group in columns],
        axis=1) if columns else np.zeros((x.shape[0], 0), dtype=np.int64)
    out = x.data[rows[:, None], argmax]

    def backward(grad):
        result = np.zeros_like(x.data)
        np.add.at(result, (np.repeat(rows, argmax.shape[1]),
                           argmax.reshape(-1)), grad.reshape(-1))
        return (result, )

    return make(out, (x, ), backward, 'maxpool_groups')


def concat_last(xs):
    """Concatenation along the last dimension."""
    if not xs or len({x.shape[0] for x in xs}) != 1:
        raise NumericsError.ShapeMismatch(
            f'concat_last: {[x.shape for x in xs]}')
    widths = np.cumsum([x.shape[-1] for x in xs])[:-1]

    def backward(grad):
        return tuple(np.split(grad, widths, axis=-1))

    return make(np.concatenate([x.data for x in xs], axis=-1), tuple(xs),
                backward, 'concat')


def dropout(x, rate, rng, train_flag):
    """Inverted dropout, identity in evaluation mode."""
    if not 0 <= rate < 1:
        raise NumericsError.BadRate(f'Bad dropout rate: {rate}')
    if not train_flag or rate == 0:
        return x
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)

    def backward(grad):
        return (grad * mask, )

    return make(x.data * mask, (x, ), backward, 'dropout')


def stack_rows(rows):
    """Stack [D] tensors into a [N, D] tensor."""
    if not rows or len({row.shape for row in rows}) != 1:
        raise NumericsError.ShapeMismatch('stack_rows: shapes differ')

    def backward(grad):
        return tuple(grad[index] for index in range(len(rows)))

    return make(np.stack([row.data for row in rows]), tuple(rows), backward,
                'stack')


def gather_sum(table, index):
    """Sum of table rows, ``out[p] = sum_a table[index[p, a]]``."""
    index = np.asarray(index, dtype=np.int64)
    if index.size and (index.min() < 0 or index.max() >= table.shape[0]):
        raise NumericsError.IndexOutOfRange('gather_sum index out of range')

    def backward(grad):
        result = np.zeros_like(table.data)
        np.add.at(result, index,
                  np.broadcast_to(grad[:, None, :],
                                  index.shape + (grad.shape[-1], )))
        return (result, )

    return make(table.data[index].sum(axis=1), (table, ), backward,
                'gather_sum')


def take_columns(x, columns):
    """Columns of a [T, P] input in the given order."""
    columns = np.asarray(columns, dtype=np.int64)

    def backward(grad):
        result = np.zeros_like(x.data)
        np.add.at(result, (slice(None), columns), grad)
        return (result, )

    return make(x.data[:, columns], (x, ), backward, 'take_columns')


def unfold(x, context, stride):
    """Windows of ``context`` frames every ``stride`` frames, flattened."""
    frames, dim = x.shape
    count = (frames - context) // stride + 1
    starts = np.arange(count) * stride
    index = starts[:, None] + np.arange(context)[None, :]

    def backward(grad):
        result = np.zeros_like(x.data)
        np.add.at(result, index, grad.reshape(count, context, dim))
        return (result, )

    return make(x.data[index].reshape(count, context * dim), (x, ),
                backward, 'unfold')


def weighted_sum(terms, weights=None):
    """Weighted sum of scalar tensors."""
    weights = [1.0] * len(terms) if weights is None else list(weights)

    def backward(grad):
        return tuple(np.full_like(term.data, grad * weight)
                     for term, weight in zip(terms, weights))

    total = sum(weight * float(term.data) for term, weight in
                zip(terms, weights))
    return make(np.asarray(total), tuple(terms), backward, 'sum')


def scalar(value):
    """Scalar tensor without gradient."""
    return Tensor(np.asarray(value, dtype=np.float64))
