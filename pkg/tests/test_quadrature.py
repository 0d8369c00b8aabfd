# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import numpy as np
import pytest

from sqip.integration.quadrature import (
    KnotQuadrature,
    composite_integrate,
    gauss_rule,
)
from sqip.lib.errors import ParameterError
from sqip.splines.bspline import UniformKnotGrid, build_space


def test_one_point_rule():
    rule = gauss_rule(1)
    np.testing.assert_allclose(rule.nodes, [0.0], atol=1e-16)
    np.testing.assert_allclose(rule.weights, [2.0])


def test_two_point_rule():
    rule = gauss_rule(2)
    np.testing.assert_allclose(rule.nodes, [-1 / np.sqrt(3), 1 / np.sqrt(3)], rtol=1e-15)
    np.testing.assert_allclose(rule.weights, [1.0, 1.0], rtol=1e-15)


@pytest.mark.parametrize("m", [1, 2, 5, 20, 64])
def test_rule_invariants(m):
    rule = gauss_rule(m)
    assert rule.nodes.size == m
    np.testing.assert_array_equal(rule.nodes, -rule.nodes[::-1])
    assert np.all(rule.weights > 0)
    assert rule.weights.sum() == pytest.approx(2.0, rel=1e-14)


@pytest.mark.parametrize("m", [2, 5, 20])
def test_exact_for_degree_2m_minus_1(m):
    rule = gauss_rule(m)
    for k in range(2 * m):
        exact = (1.0 - (-1.0) ** (k + 1)) / (k + 1)
        value = np.sum(rule.weights * rule.nodes**k)
        assert value == pytest.approx(exact, rel=1e-13, abs=1e-13)


def test_rule_is_cached():
    assert gauss_rule(20) is gauss_rule(20)


@pytest.mark.parametrize("m", [0, 65, 2.0])
def test_rule_rejects_bad_count(m):
    with pytest.raises(ParameterError):
        gauss_rule(m)


def test_composite_constant_and_cosine():
    rule = gauss_rule(20)
    assert composite_integrate(np.ones_like, [0.0, 0.2, 0.7, 1.0], rule) == pytest.approx(1.0)
    value = composite_integrate(
        lambda t: np.cos(11 * np.pi * t), np.linspace(0.0, 1.0, 41), rule
    )
    assert abs(value) <= 1e-13


def test_composite_additivity():
    rule = gauss_rule(20)
    whole = composite_integrate(np.exp, [0.0, 1.0], rule)
    split = composite_integrate(np.exp, [0.0, 0.4], rule) + composite_integrate(
        np.exp, [0.4, 1.0], rule
    )
    assert whole == pytest.approx(split, abs=1e-14)
    assert whole == pytest.approx(np.e - 1.0, rel=1e-13)


def test_composite_additivity_exact_polynomial():
    rule = gauss_rule(5)

    def f(t):
        return t**9 - 2.0 * t**4

    whole = composite_integrate(f, [0.0, 1.0], rule)
    split = composite_integrate(f, [0.0, 0.4], rule) + composite_integrate(f, [0.4, 1.0], rule)
    assert whole == pytest.approx(split, abs=1e-14)
    assert whole == pytest.approx(0.1 - 0.4, abs=1e-14)


def test_composite_rejects_bad_partition():
    rule = gauss_rule(3)
    with pytest.raises(ParameterError):
        composite_integrate(np.exp, [0.0], rule)
    with pytest.raises(ParameterError):
        composite_integrate(np.exp, [0.0, 0.5, 0.5, 1.0], rule)


def test_interior_basis_integrates_to_h():
    space = build_space(2, 8)
    rule = gauss_rule(20)
    first, last = space.support_cells(5)
    b5 = space.basis_function(5)
    value = composite_integrate(b5, space.grid.knots[first : last + 1], rule)
    assert value == pytest.approx(1 / 8, rel=1e-14)


def test_knot_quadrature_layout():
    quad = KnotQuadrature.build(UniformKnotGrid(4), gauss_rule(3))
    assert quad.size == 12
    assert quad.weights.sum() == pytest.approx(1.0, rel=1e-15)
    cell = quad.points[quad.cell_slice(2, 3)]
    assert np.all((cell > 0.5) & (cell < 0.75))
    assert quad.integrate(quad.points**2) == pytest.approx(1 / 3, rel=1e-14)
