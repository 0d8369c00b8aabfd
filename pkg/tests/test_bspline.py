# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import numpy as np
import pytest

from sqip.lib.errors import ParameterError
from sqip.splines.bspline import (
    Spline,
    UniformKnotGrid,
    build_space,
    eval_basis,
    eval_spline,
)


def test_grid_knots_and_midpoints():
    grid = UniformKnotGrid(4)
    np.testing.assert_allclose(grid.knots, [0.0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(grid.midpoints, [0.125, 0.375, 0.625, 0.875])
    assert grid.h == 0.25
    np.testing.assert_array_equal(grid.cell_index([0.0, 0.3, 0.75, 1.0]), [0, 1, 3, 3])


@pytest.mark.parametrize("n", [0, -3, 2.5])
def test_grid_rejects_bad_n(n):
    with pytest.raises(ParameterError):
        UniformKnotGrid(n)


def test_build_space_dimension():
    space = build_space(2, 4)
    assert space.dimension == 6
    assert space.extended_knots.size == space.dimension + space.degree + 1


@pytest.mark.parametrize("d, n", [(0, 4), (2, 2), (3, 3)])
def test_build_space_rejects_degenerate(d, n):
    with pytest.raises(ParameterError):
        build_space(d, n)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_partition_of_unity(d, rng):
    space = build_space(d, 10)
    t = np.concatenate([rng.uniform(0.0, 1.0, 200), [0.0, 1.0], space.grid.knots])
    values = space.basis_matrix(t).toarray()
    np.testing.assert_allclose(values.sum(axis=1), 1.0, atol=1e-14)
    assert values.min() >= 0.0


def test_end_values():
    space = build_space(2, 8)
    assert eval_basis(space, 1, 0.0) == pytest.approx(1.0)
    assert eval_basis(space, space.dimension, 1.0) == pytest.approx(1.0)
    assert eval_basis(space, 2, 0.0) == pytest.approx(0.0)


def test_interior_quadratic_peak():
    space = build_space(2, 8)
    lo, hi = space.support(4)
    assert (lo, hi) == (pytest.approx(1 / 8), pytest.approx(4 / 8))
    assert eval_basis(space, 4, 0.5 * (lo + hi)) == pytest.approx(0.75, abs=1e-15)
    assert eval_basis(space, 4, lo) == pytest.approx(0.0, abs=1e-15)


def test_support_cells_clamped_at_ends():
    space = build_space(3, 6)
    assert space.support_cells(1) == (0, 1)
    assert space.support_cells(5) == (1, 5)
    assert space.support_cells(space.dimension) == (5, 6)
    with pytest.raises(ParameterError):
        space.support_cells(space.dimension + 1)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_greville_reproduces_identity(d):
    space = build_space(d, 7)
    t = np.linspace(0.0, 1.0, 101)
    np.testing.assert_allclose(Spline(space, space.greville())(t), t, atol=1e-14)


def test_spline_evaluation(rng):
    space = build_space(2, 5)
    coefficients = rng.standard_normal(space.dimension)
    spline = Spline(space, coefficients)
    t = np.linspace(0.0, 1.0, 33)
    expected = space.basis_matrix(t) @ coefficients
    np.testing.assert_allclose(spline(t), expected, atol=1e-14)
    assert isinstance(eval_spline(spline, 0.3), float)
    assert spline(1.0) == pytest.approx(coefficients[-1])


def test_spline_is_immutable():
    space = build_space(2, 5)
    spline = space.basis_function(3)
    with pytest.raises(ValueError):
        spline.coefficients[0] = 1.0


def test_spline_rejects_bad_input():
    space = build_space(2, 5)
    with pytest.raises(ParameterError):
        Spline(space, np.zeros(space.dimension + 1))
    with pytest.raises(ParameterError):
        space.basis_function(1)(1.5)
    with pytest.raises(ParameterError):
        eval_basis(space, 0, 0.5)


def _one_sided_derivatives(spline, knot, h):
    """First and second derivatives from four samples on one side; exact up to cubics."""
    f = np.array([spline(knot + k * h) for k in range(4)])
    first = (-11.0 * f[0] + 18.0 * f[1] - 9.0 * f[2] + 2.0 * f[3]) / (6.0 * h)
    second = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h)
    return first, second


@pytest.mark.parametrize("d", [2, 3])
def test_smooth_across_interior_knots(d, rng):
    space = build_space(d, 8)
    h = 1e-3
    for _ in range(3):
        spline = Spline(space, rng.standard_normal(space.dimension))
        for knot in space.grid.knots[1:-1]:
            left = _one_sided_derivatives(spline, knot, -h)
            right = _one_sided_derivatives(spline, knot, h)
            # derivatives up to order d - 1 agree from both sides
            assert right[0] == pytest.approx(left[0], abs=1e-7)
            if d == 3:
                assert right[1] == pytest.approx(left[1], abs=1e-4)


def test_top_derivative_jumps_at_a_knot():
    space = build_space(2, 8)
    spline = space.basis_function(4)
    knot = space.grid.knots[2]
    left = _one_sided_derivatives(spline, knot, -1e-3)
    right = _one_sided_derivatives(spline, knot, 1e-3)
    assert abs(right[1] - left[1]) >= 1.0


@pytest.mark.parametrize("d", [1, 2, 3])
def test_basis_vanishes_outside_support(d):
    space = build_space(d, 10)
    t = np.linspace(0.0, 1.0, 401)
    for i in range(1, space.dimension + 1):
        lo, hi = space.support(i)
        for point in t[(t < lo) | (t > hi)]:
            assert eval_basis(space, i, point) == 0.0
        inside = t[(t > lo) & (t < hi)]
        assert all(eval_basis(space, i, point) > 0.0 for point in inside)
