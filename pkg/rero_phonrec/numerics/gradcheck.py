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

"""Finite difference verification of gradients."""

from dataclasses import dataclass, field

import numpy as np

from .tensor import ParamStore, Tensor


@dataclass
class GradCheckReport:
    """Relative errors per parameter."""

    errors: dict = field(default_factory=dict)
    tol: float = 1e-4

    @property
    def max_relative_error(self):
        """Worst relative error."""
        return max(self.errors.values(), default=0.0)

    @property
    def passed(self):
        """Every parameter within tolerance."""
        return self.max_relative_error < self.tol

    @property
    def failed(self):
        """Parameters above tolerance."""
        return sorted(name for name, error in self.errors.items()
                      if error >= self.tol)


def _named(params):
    if isinstance(params, ParamStore):
        return list(params.trainable_items())
    if isinstance(params, dict):
        return list(params.items())
    if isinstance(params, Tensor):
        params = [params]
    return [(tensor.name or str(index), tensor)
            for index, tensor in enumerate(params)]


def _value(f):
    value = f()
    return float(value.data if isinstance(value, Tensor) else value)


def grad_check(f, params, tol=1e-4, step=1e-5, max_elements=None, seed=0):
    """Compare analytic gradients with central differences.

    The relative error of a parameter is
    ``|a - n| / max(|a| + |n|, 1e-8)`` with gradient norms over the checked
    elements.

    :param f: deterministic function returning a scalar Tensor.
    :param params: ParamStore, mapping or list of tensors.
    :param max_elements: check a seeded sample of elements per parameter.
    :return: GradCheckReport
    """
    named = _named(params)
    for _, tensor in named:
        tensor.zero_grad()
    loss = f()
    loss.backward()
    analytic = {name: (np.zeros_like(tensor.data) if tensor.grad is None
                       else tensor.grad.copy()) for name, tensor in named}
    rng = np.random.default_rng(seed)
    report = GradCheckReport(tol=tol)
    for name, tensor in named:
        tensor.data = np.ascontiguousarray(tensor.data)
        flat = tensor.data.reshape(-1)
        indices = np.arange(flat.size)
        if max_elements and flat.size > max_elements:
            indices = np.sort(rng.choice(flat.size, max_elements,
                                         replace=False))
        numeric = np.empty(len(indices))
        for position, index in enumerate(indices):
            original = flat[index]
            flat[index] = original + step
            plus = _value(f)
            flat[index] = original - step
            minus = _value(f)
            flat[index] = original
            numeric[position] = (plus - minus) / (2 * step)
        exact = analytic[name].reshape(-1)[indices]
        denominator = max(np.linalg.norm(exact) + np.linalg.norm(numeric),
                          1e-8)
        report.errors[name] = float(
            np.linalg.norm(exact - numeric) / denominator)
    for _, tensor in named:
        tensor.zero_grad()
    return report
