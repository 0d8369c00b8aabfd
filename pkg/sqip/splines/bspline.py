# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""Uniform B-spline spaces of degree d and class C^{d-1} on [0, 1].

Basis functions are indexed 1..N, N = n + d, and B_i is supported on
[t_{i-d-1}, t_i] of the clamped (d+1-fold end knot) sequence. Evaluation is
right-continuous at interior knots and left-continuous at t = 1, so that
B_N(1) = 1.
"""

import functools
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
import scipy.sparse
from scipy.interpolate import BSpline

from sqip.lib.errors import ParameterError

ArrayLike = Union[float, np.ndarray]


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def check_points(t: ArrayLike) -> np.ndarray:
    """Return `t` as a float array, raising if any point is outside [0, 1]."""
    points = np.asarray(t, dtype=float)
    if not np.all((points >= 0.0) & (points <= 1.0)):
        raise ParameterError("evaluation points must lie in [0, 1]")
    return points


@dataclass(frozen=True)
class UniformKnotGrid:
    """Knots t_i = i/n, 0 <= i <= n, and cell midpoints s_i, 1 <= i <= n."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ParameterError(f"subinterval count must be a positive integer, got {self.n!r}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @functools.cached_property
    def knots(self) -> np.ndarray:
        return _readonly(np.arange(self.n + 1) / self.n)

    @functools.cached_property
    def midpoints(self) -> np.ndarray:
        # s_i = (2i - 1) / (2n), entry i-1 holds s_i
        return _readonly(np.arange(1, 2 * self.n, 2) / (2 * self.n))

    def cell_index(self, t: ArrayLike) -> np.ndarray:
        """Zero-based index of the cell [t_c, t_{c+1}) containing t; t = 1 maps to n-1."""
        points = check_points(t)
        return np.minimum(np.floor(points * self.n).astype(int), self.n - 1)


@dataclass(frozen=True)
class SplineSpace:
    degree: int
    grid: UniformKnotGrid

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def dimension(self) -> int:
        return self.grid.n + self.degree

    @functools.cached_property
    def extended_knots(self) -> np.ndarray:
        d = self.degree
        return _readonly(
            np.concatenate((np.zeros(d), self.grid.knots, np.ones(d)))
        )

    def _check_index(self, i: int):
        if not 1 <= i <= self.dimension:
            raise ParameterError(
                f"basis index {i} out of range 1..{self.dimension}"
            )

    def support_cells(self, i: int) -> Tuple[int, int]:
        """Zero-based cells [first, last) covering supp(B_i) within [0, 1]."""
        self._check_index(i)
        return max(i - self.degree - 1, 0), min(i, self.n)

    def support(self, i: int) -> Tuple[float, float]:
        first, last = self.support_cells(i)
        return self.grid.knots[first], self.grid.knots[last]

    def greville(self) -> np.ndarray:
        """Greville abscissae; the coefficients of t -> t in this space."""
        d = self.degree
        ext = self.extended_knots
        return np.array([ext[i + 1 : i + d + 1].mean() for i in range(self.dimension)])

    def basis_matrix(self, points: ArrayLike) -> scipy.sparse.csr_matrix:
        """Sparse matrix M[k, j-1] = B_j(points[k]) with d+1 entries per row."""
        x = np.atleast_1d(check_points(points)).ravel()
        matrix = BSpline.design_matrix(x, self.extended_knots, self.degree)
        return scipy.sparse.csr_matrix(matrix)

    def basis_function(self, i: int) -> "Spline":
        self._check_index(i)
        coefficients = np.zeros(self.dimension)
        coefficients[i - 1] = 1.0
        return Spline(self, coefficients)


@dataclass(frozen=True, eq=False)
class Spline:
    """An element sum_j c_j B_j of a SplineSpace; callable on points in [0, 1]."""

    space: SplineSpace
    coefficients: np.ndarray

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=float).ravel()
        if coefficients.size != self.space.dimension:
            raise ParameterError(
                f"expected {self.space.dimension} coefficients, got {coefficients.size}"
            )
        object.__setattr__(self, "coefficients", _readonly(coefficients))

    @functools.cached_property
    def _bspline(self) -> BSpline:
        return BSpline(
            self.space.extended_knots,
            self.coefficients,
            self.space.degree,
            extrapolate=False,
        )

    def __call__(self, t: ArrayLike) -> ArrayLike:
        points = check_points(t)
        values = self._bspline(points)
        if values.ndim == 0:
            return float(values)
        return values


def build_space(d: int, n: int) -> SplineSpace:
    """The space S_d^{d-1} on n uniform cells, N = n + d."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ParameterError(f"degree must be an integer >= 1, got {d!r}")
    if not isinstance(n, (int, np.integer)) or n < d + 1:
        raise ParameterError(f"need n >= d + 1 = {d + 1}, got n = {n!r}")
    return SplineSpace(degree=int(d), grid=UniformKnotGrid(int(n)))


def eval_basis(space: SplineSpace, i: int, t: float) -> float:
    """B_i(t) for 1 <= i <= N."""
    space._check_index(i)
    check_points(t)
    return float(space.basis_matrix(t)[0, i - 1])


def eval_spline(s: Spline, t: ArrayLike) -> ArrayLike:
    return s(t)
