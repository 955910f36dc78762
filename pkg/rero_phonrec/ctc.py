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

"""Connectionist temporal classification.

The blank symbol is always the last column of a log probability matrix.
"""

import itertools
from dataclasses import dataclass

import numpy as np

NEG_INF = -np.inf


class CtcError:
    """Base class for errors in CTC computations."""

    class TargetTooLong(Exception):
        """Not enough frames for the target sequence."""

    class TooLarge(Exception):
        """Too many paths to enumerate."""


@dataclass
class CtcLattice:
    """Log space forward and backward trellis of one sequence."""

    extended: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    log_likelihood: float


def required_frames(target):
    """Minimal number of frames for a target sequence."""
    repeats = sum(1 for a, b in zip(target, target[1:]) if a == b)
    return len(target) + repeats


def extend(target, blank):
    """Target with blanks interleaved, length ``2U + 1``."""
    extended = np.full(2 * len(target) + 1, blank, dtype=np.int64)
    extended[1::2] = target
    return extended


def _check(log_probs, target):
    log_probs = np.asarray(log_probs, dtype=np.float64)
    target = [int(label) for label in target]
    blank = log_probs.shape[1] - 1
    if any(label < 0 or label >= blank for label in target):
        raise ValueError(f'Labels must be in [0, {blank})')
    if required_frames(target) > log_probs.shape[0]:
        raise CtcError.TargetTooLong(
            f'{log_probs.shape[0]} frames for a target needing '
            f'{required_frames(target)}')
    return log_probs, target


def _shift(values, count):
    """Shift states right by ``count``, padding with -inf."""
    shifted = np.full_like(values, NEG_INF)
    shifted[:, count:] = values[:, :-count]
    return shifted


def _unshift(values, count):
    """Shift states left by ``count``, padding with -inf."""
    shifted = np.full_like(values, NEG_INF)
    shifted[:, :-count] = values[:, count:]
    return shifted


def _lattices(blocks, targets):
    """Forward and backward variables of several sequences of equal length.

    :return: emissions, alpha, beta [N, T, S], log likelihoods [N] and the
        extended sequences.
    """
    frames = blocks[0].shape[0]
    extended = [extend(target, block.shape[1] - 1)
                for block, target in zip(blocks, targets)]
    states = max(len(ext) for ext in extended)
    count = len(blocks)
    emit = np.full((count, frames, states), NEG_INF)
    skip = np.zeros((count, states), dtype=bool)
    for n, (block, ext) in enumerate(zip(blocks, extended)):
        emit[n, :, :len(ext)] = block[:, ext]
        skip[n, 3:len(ext):2] = ext[3::2] != ext[1:-2:2]
    alpha = np.full((count, frames, states), NEG_INF)
    alpha[:, 0, :2] = emit[:, 0, :2]
    for t in range(1, frames):
        previous = alpha[:, t - 1]
        merged = np.logaddexp(previous, _shift(previous, 1))
        merged = np.logaddexp(
            merged, np.where(skip, _shift(previous, 2), NEG_INF))
        alpha[:, t] = merged + emit[:, t]
    beta = np.full((count, frames, states), NEG_INF)
    lengths = np.array([len(ext) for ext in extended])
    last = np.full((count, states), NEG_INF)
    for n, length in enumerate(lengths):
        last[n, length - 1] = 0.0
        if length > 1:
            last[n, length - 2] = 0.0
    beta[:, -1] = last + emit[:, -1]
    skip_next = _unshift(skip.astype(np.float64), 2) > 0
    for t in range(frames - 2, -1, -1):
        following = beta[:, t + 1]
        merged = np.logaddexp(following, _unshift(following, 1))
        merged = np.logaddexp(
            merged, np.where(skip_next, _unshift(following, 2), NEG_INF))
        beta[:, t] = merged + emit[:, t]
    final = alpha[np.arange(count), -1]
    log_likelihood = np.array([
        np.logaddexp(final[n, length - 1],
                     final[n, length - 2] if length > 1 else NEG_INF)
        for n, length in enumerate(lengths)])
    return emit, alpha, beta, log_likelihood, extended


def ctc_losses(blocks, targets):
    """CTC losses of several sequences sharing the number of frames.

    :param blocks: list of [T, K_n + 1] log probability matrices.
    :param targets: list of label sequences.
    :return: losses [N] and the gradients with respect to each block.
    """
    checked = [_check(block, target) for block, target in
               zip(blocks, targets)]
    blocks = [block for block, _ in checked]
    targets = [target for _, target in checked]
    if len({block.shape[0] for block in blocks}) != 1:
        raise ValueError('Sequences must share the number of frames')
    emit, alpha, beta, log_likelihood, extended = _lattices(blocks, targets)
    with np.errstate(invalid='ignore'):
        occupancy = np.where(
            np.isfinite(emit),
            alpha + beta - emit - log_likelihood[:, None, None],
            NEG_INF)
    occupancy = np.exp(occupancy)
    grads = []
    for n, (block, ext) in enumerate(zip(blocks, extended)):
        grad = np.zeros_like(block)
        np.add.at(grad, (slice(None), ext), occupancy[n, :, :len(ext)])
        grads.append(-grad)
    return -log_likelihood, grads


def ctc_lattice(log_probs, target):
    """Forward and backward trellis of one sequence."""
    log_probs, target = _check(log_probs, target)
    _, alpha, beta, log_likelihood, extended = _lattices(
        [log_probs], [target])
    states = len(extended[0])
    return CtcLattice(extended=extended[0], alpha=alpha[0, :, :states],
                      beta=beta[0, :, :states],
                      log_likelihood=float(log_likelihood[0]))


def ctc_loss(log_probs, target):
    """Negative log likelihood of a target and its gradient.

    :param log_probs: [T, K + 1] log probabilities, blank last.
    :param target: label ids in [0, K).
    :return: loss and gradient with respect to the logits the log
        probabilities were normalized from.
    """
    losses, grads = ctc_losses([log_probs], [target])
    log_probs = np.asarray(log_probs, dtype=np.float64)
    return float(losses[0]), np.exp(log_probs) + grads[0]


def collapse(path, blank):
    """Merge repeats then remove blanks."""
    return [label for label, _ in itertools.groupby(path) if label != blank]


def ctc_brute_force(log_probs, target, limit=10 ** 6):
    """Loss by enumerating every frame labeling, the test oracle.

    :return: negative log likelihood, ``inf`` for infeasible targets.
    """
    log_probs = np.asarray(log_probs, dtype=np.float64)
    frames, width = log_probs.shape
    if width ** frames > limit:
        raise CtcError.TooLarge(f'{width ** frames} paths')
    target = [int(label) for label in target]
    blank = width - 1
    total = NEG_INF
    for path in itertools.product(range(width), repeat=frames):
        if collapse(path, blank) == target:
            total = np.logaddexp(
                total, log_probs[np.arange(frames), list(path)].sum())
    return float(-total)


def greedy_decode(log_probs):
    """Frame arg max, merge repeats, remove blanks."""
    log_probs = np.asarray(log_probs)
    if not log_probs.shape[0]:
        return []
    return collapse(np.argmax(log_probs, axis=1).tolist(),
                    log_probs.shape[1] - 1)
