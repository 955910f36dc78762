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

"""Adam optimizer over a parameter store."""

import numpy as np

from .tensor import NumericsError
from ..config import TRAINING_ADAM_BETAS, TRAINING_ADAM_EPSILON


class Adam(object):
    """Adam with bias correction.

    Non trainable and frozen-to-zero parameters are never updated.
    """

    def __init__(self, store, betas=TRAINING_ADAM_BETAS,
                 eps=TRAINING_ADAM_EPSILON):
        """Constructor."""
        self.store = store
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.steps = 0
        self.moments = {}
        for name, tensor in store.items():
            self.moments[name] = (np.zeros_like(tensor.data),
                                  np.zeros_like(tensor.data))

    def step(self, lr, grads=None):
        """One update.

        :param lr: learning rate.
        :param grads: name to gradient mapping, defaults to the parameter
            gradient buffers.
        """
        self.steps += 1
        correction1 = 1.0 - self.beta1 ** self.steps
        correction2 = 1.0 - self.beta2 ** self.steps
        for name, tensor in self.store.trainable_items():
            grad = tensor.grad if grads is None else grads.get(name)
            if grad is None:
                grad = np.zeros_like(tensor.data)
            grad = np.asarray(grad, dtype=np.float64)
            if grad.shape != tensor.data.shape:
                raise NumericsError.ShapeMismatch(
                    f'{name}: gradient {grad.shape} for {tensor.data.shape}')
            first, second = self.moments[name]
            first *= self.beta1
            first += (1.0 - self.beta1) * grad
            second *= self.beta2
            second += (1.0 - self.beta2) * grad * grad
            tensor.data = tensor.data - lr * (first / correction1) / (
                np.sqrt(second / correction2) + self.eps)
        return self.store

    def state(self):
        """Moments and step count."""
        state = {'steps': self.steps}
        for name, (first, second) in self.moments.items():
            state[f'adam.m.{name}'] = first.copy()
            state[f'adam.v.{name}'] = second.copy()
        return state

    def load_state(self, state):
        """Restore moments and step count."""
        self.steps = int(state['steps'])
        for name in self.moments:
            self.moments[name] = (
                np.array(state[f'adam.m.{name}'], dtype=np.float64),
                np.array(state[f'adam.v.{name}'], dtype=np.float64))


def adam_step(store, grads, lr, beta1=0.9, beta2=0.999, eps=1e-8,
              optimizer=None):
    """Apply one Adam update to a store.

    :param optimizer: Adam instance keeping moments across calls.
    :return: the optimizer.
    """
    optimizer = optimizer or Adam(store, betas=(beta1, beta2), eps=eps)
    optimizer.step(lr, grads)
    return optimizer
