# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import numpy as np
import pytest

from sqip.integration.quadrature import gauss_rule
from sqip.lib.errors import DivergenceError, ParameterError
from sqip.solvers.discretization import discretize
from sqip.solvers.newton import (
    NewtonConfig,
    SeedPolicy,
    initial_coefficients,
    newton_iterate,
)


def test_config_validation():
    with pytest.raises(ParameterError):
        NewtonConfig(tol=0.0)
    with pytest.raises(ParameterError):
        NewtonConfig(max_iter=0)
    with pytest.raises(ParameterError):
        NewtonConfig(max_iter=2.5)
    with pytest.raises(ParameterError):
        NewtonConfig(seed=SeedPolicy.CUSTOM)


def test_square_root_of_two():
    x, history = newton_iterate(
        step=lambda x: x - (x * x - 2.0) / (2.0 * x),
        residual=lambda x: float(np.max(np.abs(x * x - 2.0))),
        x0=np.array([1.0]),
        cfg=NewtonConfig(),
        label="sqrt2",
    )
    assert x[0] == pytest.approx(np.sqrt(2.0), abs=1e-15)
    assert len(history) <= 7
    # quadratic convergence
    assert history[3] <= 10 * history[2] ** 2


def test_divergence_keeps_history():
    with pytest.raises(DivergenceError) as excinfo:
        newton_iterate(
            step=lambda x: x + 1.0,
            residual=lambda x: 0.0,
            x0=np.zeros(2),
            cfg=NewtonConfig(max_iter=5),
            label="drift",
        )
    assert excinfo.value.history == [1.0] * 5


def _overshoot(x):
    return x - 3.0 * x


def test_damping_rescues_overshooting_step():
    def residual(x):
        return float(np.max(np.abs(x)))

    with pytest.raises(DivergenceError):
        newton_iterate(_overshoot, residual, np.ones(1), NewtonConfig(max_iter=20), "plain")
    x, _ = newton_iterate(
        _overshoot, residual, np.ones(1), NewtonConfig(max_iter=100, damping=True), "damped"
    )
    assert abs(x[0]) <= 1e-10


def test_seed_policies(q2_scheme, zero_kernel_problem):
    disc = discretize(q2_scheme, gauss_rule(20))
    projected = initial_coefficients(zero_kernel_problem, disc, NewtonConfig())
    exact = initial_coefficients(
        zero_kernel_problem, disc, NewtonConfig(seed=SeedPolicy.EXACT_SEED)
    )
    np.testing.assert_allclose(projected, exact, atol=1e-15)
    custom = np.arange(disc.dimension, dtype=float)
    seeded = initial_coefficients(
        zero_kernel_problem,
        disc,
        NewtonConfig(seed=SeedPolicy.CUSTOM, custom_seed=custom),
    )
    np.testing.assert_array_equal(seeded, custom)
    with pytest.raises(ParameterError):
        initial_coefficients(
            zero_kernel_problem,
            disc,
            NewtonConfig(seed=SeedPolicy.CUSTOM, custom_seed=np.zeros(3)),
        )


def _creep(x):
    return x + 1e-13


@pytest.mark.parametrize("final_residual", [0.0, 5e-13])
def test_stagnation_accepted_with_small_residual(final_residual):
    x, history = newton_iterate(
        _creep, lambda x: final_residual, np.zeros(1), NewtonConfig(max_iter=10), "creep"
    )
    assert len(history) == 2
    assert x[0] == pytest.approx(2e-13)


def test_stagnation_rejected_with_large_residual():
    with pytest.raises(DivergenceError) as excinfo:
        newton_iterate(_creep, lambda x: 1.0, np.zeros(1), NewtonConfig(max_iter=6), "creep")
    assert len(excinfo.value.history) == 6
