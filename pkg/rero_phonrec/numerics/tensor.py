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

"""Dense float64 tensors with reverse mode gradients and parameters."""

from collections import OrderedDict

import numpy as np


class NumericsError:
    """Base class for errors in the numeric core."""

    class ShapeMismatch(Exception):
        """Operand shapes do not agree."""

    class BadRate(Exception):
        """Dropout rate outside of [0, 1)."""

    class EmptyGroup(Exception):
        """Pooling group without index."""

    class IndexOutOfRange(Exception):
        """Pooling index outside of the input."""

    class NaNInput(Exception):
        """Input contains NaN values."""


class Tensor(object):
    """Dense tensor of 64 bit floats.

    ``backward_fn`` maps the output gradient to one gradient per parent
    (``None`` for parents without gradient).
    """

    def __init__(self, data, requires_grad=False, parents=(),
                 backward_fn=None, name=None):
        """Constructor."""
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad = None
        self.name = name
        self._parents = tuple(parents)
        self._backward_fn = backward_fn

    @property
    def shape(self):
        """Dimensions."""
        return self.data.shape

    def __repr__(self):
        """Representation."""
        return f'Tensor(shape={self.shape}, name={self.name})'

    def item(self):
        """Python float of a one element tensor."""
        return float(self.data.reshape(-1)[0])

    def zero_grad(self):
        """Drop the gradient buffer."""
        self.grad = None

    def accumulate(self, grad):
        """Add to the gradient buffer."""
        grad = np.asarray(grad, dtype=np.float64)
        if grad.shape != self.data.shape:
            raise NumericsError.ShapeMismatch(
                f'gradient {grad.shape} for tensor {self.data.shape}')
        if self.grad is None:
            self.grad = grad.copy()
        else:
            self.grad += grad

    def _topological_order(self):
        order = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def backward(self, grad=None):
        """Accumulate gradients of this tensor into every ancestor."""
        if grad is None:
            grad = np.ones_like(self.data)
        self.accumulate(grad)
        for node in reversed(self._topological_order()):
            if node._backward_fn is None or node.grad is None:
                continue
            grads = node._backward_fn(node.grad)
            for parent, parent_grad in zip(node._parents, grads):
                if parent.requires_grad and parent_grad is not None:
                    parent.accumulate(parent_grad)


def constant(data):
    """Tensor without gradient."""
    return Tensor(data, requires_grad=False)


def make(data, parents, backward_fn, name=None):
    """Result tensor of an operation."""
    requires_grad = any(parent.requires_grad for parent in parents)
    return Tensor(data, requires_grad=requires_grad,
                  parents=parents if requires_grad else (),
                  backward_fn=backward_fn if requires_grad else None,
                  name=name)


class ParamStore(object):
    """Named parameters in registration order.

    Non trainable parameters keep their values, frozen-to-zero parameters
    read as exact zeros; neither receives updates.
    """

    def __init__(self):
        """Constructor."""
        self._params = OrderedDict()
        self._trainable = {}
        self._frozen_zero = set()

    def register(self, name, data, trainable=True, frozen_zero=False):
        """Register a new parameter.

        :return: the parameter Tensor.
        """
        if name in self._params:
            raise KeyError(f'Parameter already registered: {name}')
        data = np.array(data, dtype=np.float64)
        if frozen_zero:
            data = np.zeros_like(data)
            trainable = False
            self._frozen_zero.add(name)
        tensor = Tensor(data, requires_grad=trainable, name=name)
        self._params[name] = tensor
        self._trainable[name] = trainable
        return tensor

    def __getitem__(self, name):
        """Parameter by name."""
        return self._params[name]

    def __contains__(self, name):
        """Test registration."""
        return name in self._params

    def __iter__(self):
        """Iterate over names in registration order."""
        return iter(self._params)

    def __len__(self):
        """Number of parameters."""
        return len(self._params)

    def items(self):
        """Name and tensor pairs in registration order."""
        return self._params.items()

    def is_trainable(self, name):
        """Parameter receives updates."""
        return self._trainable[name]

    def is_frozen_zero(self, name):
        """Parameter reads as exact zeros."""
        return name in self._frozen_zero

    def set_trainable(self, name, trainable):
        """Change the trainable flag of a parameter."""
        if name in self._frozen_zero:
            return
        self._trainable[name] = trainable
        self._params[name].requires_grad = trainable

    def trainable_items(self):
        """Name and tensor pairs of trainable parameters."""
        return [(name, tensor) for name, tensor in self._params.items()
                if self._trainable[name]]

    def zero_grad(self):
        """Drop every gradient buffer."""
        for tensor in self._params.values():
            tensor.zero_grad()

    def state(self):
        """Copy of every parameter value."""
        return OrderedDict(
            (name, tensor.data.copy())
            for name, tensor in self._params.items())

    def load_state(self, state):
        """Set parameter values from a state mapping."""
        for name, tensor in self._params.items():
            data = np.asarray(state[name], dtype=np.float64)
            if data.shape != tensor.data.shape:
                raise NumericsError.ShapeMismatch(
                    f'{name}: {data.shape} for {tensor.data.shape}')
            if name in self._frozen_zero:
                data = np.zeros_like(data)
            tensor.data = data.copy()

    def size(self):
        """Number of scalar parameters."""
        return sum(tensor.data.size for tensor in self._params.values())
