# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import numpy as np
import pytest

from sqip.integration.operator import UrysohnProblem
from sqip.splines.bspline import build_space
from sqip.splines.quasi_interp import QipVariant, build_qip


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def q2_scheme():
    return build_qip(build_space(2, 16), QipVariant.Q2)


@pytest.fixture
def zero_kernel_problem():
    """x = f with K = 0 and a right hand side inside every spline space here."""
    return UrysohnProblem(
        label="zero-kernel",
        kernel=lambda s, t, u: 0.0 * (s + t + u),
        kernel_du=lambda s, t, u: 0.0 * (s + t + u),
        rhs=lambda s: 1.0 + 2.0 * np.asarray(s) - np.asarray(s) ** 2,
        exact_solution=lambda s: 1.0 + 2.0 * np.asarray(s) - np.asarray(s) ** 2,
    )
