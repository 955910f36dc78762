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

"""Test finite difference gradient checks."""

import numpy as np

from rero_phonrec.model.checks import op_checks
from rero_phonrec.numerics.gradcheck import GradCheckReport, grad_check
from rero_phonrec.numerics.tensor import Tensor, make


def _square_sum(x, factor):
    return make(np.asarray((x.data ** 2).sum()), (x, ),
                lambda grad: (grad * factor * x.data, ))


def test_correct_gradient():
    """Test an exact gradient passes."""
    x = Tensor([1.0, -2.0, 0.5], requires_grad=True, name='x')
    report = grad_check(lambda: _square_sum(x, 2.0), [x])
    assert report.passed
    assert list(report.errors) == ['x']
    assert x.grad is None


def test_wrong_gradient():
    """Test a wrong gradient fails."""
    x = Tensor([1.0, -2.0, 0.5], requires_grad=True, name='x')
    report = grad_check(lambda: _square_sum(x, 3.0), {'x': x})
    assert not report.passed
    assert report.failed == ['x']
    assert report.max_relative_error > 0.1


def test_sampled_elements():
    """Test a sample of elements is checked."""
    x = Tensor(np.linspace(-1, 1, 20), requires_grad=True, name='x')
    report = grad_check(lambda: _square_sum(x, 2.0), x, max_elements=5)
    assert report.passed
    assert GradCheckReport().max_relative_error == 0.0


def test_operations():
    """Test every differentiable operation."""
    reports = op_checks(seed=3)
    assert 'ctc' in reports
    failed = [name for name, report in reports.items() if not report.passed]
    assert failed == []


def test_operations_random_trials():
    """Test every differentiable operation over a hundred random draws."""
    failed = []
    for seed in range(100):
        failed.extend(
            (seed, name) for name, report in op_checks(seed=seed).items()
            if not report.passed)
    assert failed == []
