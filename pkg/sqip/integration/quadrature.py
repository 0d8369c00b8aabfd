# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""Gauss-Legendre rules and composite integration on knot-aligned cells."""

import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import legendre

from sqip.lib.errors import ParameterError
from sqip.splines.bspline import UniformKnotGrid

MAX_POINTS = 64
DEFAULT_POINTS = 20


@dataclass(frozen=True, eq=False)
class GaussRule:
    """m-point Gauss-Legendre rule on [-1, 1]; exact up to degree 2m - 1."""

    m: int
    nodes: np.ndarray
    weights: np.ndarray


@functools.lru_cache(maxsize=None)
def gauss_rule(m: int = DEFAULT_POINTS) -> GaussRule:
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= MAX_POINTS:
        raise ParameterError(f"Gauss point count must be in 1..{MAX_POINTS}, got {m!r}")
    nodes, weights = legendre.leggauss(int(m))
    # Exact symmetry about 0.
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return GaussRule(m=int(m), nodes=nodes, weights=weights)


def _mapped_points(breakpoints: np.ndarray, rule: GaussRule):
    left = breakpoints[:-1, None]
    right = breakpoints[1:, None]
    half = 0.5 * (right - left)
    points = 0.5 * (left + right) + half * rule.nodes[None, :]
    weights = half * rule.weights[None, :]
    return points, weights


def composite_integrate(
    f: Callable[[np.ndarray], np.ndarray], breakpoints, rule: GaussRule
) -> float:
    """Apply `rule` on every cell of `breakpoints` and sum, cell by cell.

    `f` must accept an array of points and return values of the same shape.
    """
    breakpoints = np.asarray(breakpoints, dtype=float).ravel()
    if breakpoints.size < 2:
        raise ParameterError("composite integration needs at least one cell")
    if not np.all(np.diff(breakpoints) > 0):
        raise ParameterError("breakpoints must be strictly increasing")
    points, weights = _mapped_points(breakpoints, rule)
    values = np.asarray(f(points), dtype=float).reshape(points.shape)
    return float(np.sum(np.sum(values * weights, axis=1)))


@dataclass(frozen=True, eq=False)
class KnotQuadrature:
    """Composite rule on the cells of a knot grid, flattened cell by cell.

    points[c * m + q] is the q-th abscissa of cell c.
    """

    grid: UniformKnotGrid
    rule: GaussRule
    points: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, grid: UniformKnotGrid, rule: GaussRule) -> "KnotQuadrature":
        points, weights = _mapped_points(np.asarray(grid.knots), rule)
        points = np.clip(points.ravel(), 0.0, 1.0)
        weights = weights.ravel()
        points.setflags(write=False)
        weights.setflags(write=False)
        return cls(grid=grid, rule=rule, points=points, weights=weights)

    @property
    def size(self) -> int:
        return self.points.size

    def cell_slice(self, first_cell: int, last_cell: int) -> slice:
        """Abscissae of cells first_cell..last_cell-1."""
        m = self.rule.m
        return slice(first_cell * m, last_cell * m)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Integrate sampled values along the last axis."""
        return np.asarray(values) @ self.weights
