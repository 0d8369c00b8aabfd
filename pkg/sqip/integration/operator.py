# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""The Urysohn operator K(x)(s) = int_0^1 k(s, t, x(t)) dt and its derivative.

Kernels are vectorized: k(s, t, u) and dk/du(s, t, u) must broadcast over
array arguments. All integrals use a composite Gauss rule on the knot cells.
"""

import functools
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Protocol, Union

import numpy as np
import scipy.sparse

from sqip.integration.quadrature import (
    DEFAULT_POINTS,
    GaussRule,
    KnotQuadrature,
    gauss_rule,
)
from sqip.lib.errors import NumericError, ParameterError, ProblemError
from sqip.splines.bspline import SplineSpace, UniformKnotGrid, check_points

logger = logging.getLogger(__name__)

Kernel = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
PointFunction = Callable[[np.ndarray], np.ndarray]

# elements per kernel block in the chunked evaluations
CHUNK_ELEMENTS = 1 << 22
CONSISTENCY_TOL = 1e-10
CONSISTENCY_SAMPLES = 20
CONSISTENCY_CELLS = 40


class Evaluable(Protocol):
    """Anything that maps an array of points in [0, 1] to values."""

    def __call__(self, t: np.ndarray) -> np.ndarray:
        ...


@dataclass(frozen=True)
class UrysohnProblem:
    """x - K(x) = f on [0, 1] with kernel k(s, t, u)."""

    label: str
    kernel: Kernel
    kernel_du: Kernel
    rhs: PointFunction
    exact_solution: Optional[PointFunction] = None

    def check_consistency(
        self, quad: Optional[KnotQuadrature] = None, tol: float = CONSISTENCY_TOL
    ) -> float:
        """Max of |phi - K(phi) - f| at sample points; raises ProblemError above tol."""
        if self.exact_solution is None:
            return 0.0
        if quad is None:
            quad = knot_quadrature(CONSISTENCY_CELLS, DEFAULT_POINTS)
        s = np.linspace(0.0, 1.0, CONSISTENCY_SAMPLES)
        phi_tau = sample_function(self.exact_solution, quad.points)
        residual = (
            sample_function(self.exact_solution, s)
            - integrate_kernel(self, s, phi_tau, quad)
            - sample_function(self.rhs, s)
        )
        worst = float(np.max(np.abs(residual)))
        if not worst <= tol:
            raise ProblemError(
                f"{self.label}: exact solution residual {worst:.3e} exceeds {tol:.1e}"
            )
        logger.debug("%s: self-consistency residual %.3e", self.label, worst)
        return worst


@functools.lru_cache(maxsize=32)
def knot_quadrature(n: int, m: int = DEFAULT_POINTS) -> KnotQuadrature:
    return KnotQuadrature.build(UniformKnotGrid(n), gauss_rule(m))


def sample_function(fn: Evaluable, points: np.ndarray) -> np.ndarray:
    """Values of `fn` at `points` as a float array of the same shape."""
    values = np.asarray(fn(points), dtype=float)
    return np.broadcast_to(values, np.shape(points)).astype(float)


def _check_finite(values: np.ndarray, s: np.ndarray, t: np.ndarray, what: str):
    if np.all(np.isfinite(values)):
        return
    bad = np.argwhere(~np.isfinite(values))[0]
    a, q = bad[0], bad[-1]
    raise NumericError(f"non-finite {what}", s=float(s[a]), t=float(t[q]))


def _row_chunks(rows: int, cols: int):
    step = max(1, CHUNK_ELEMENTS // max(cols, 1))
    for start in range(0, rows, step):
        yield slice(start, min(start + step, rows))


def integrate_kernel(
    problem: UrysohnProblem, s: np.ndarray, x_tau: np.ndarray, quad: KnotQuadrature
) -> np.ndarray:
    """K(x)(s) for every s, given x sampled at the quadrature abscissae."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = quad.points
    out = np.empty(s.size)
    for rows in _row_chunks(s.size, t.size):
        block = problem.kernel(s[rows, None], t[None, :], x_tau[None, :])
        block = np.broadcast_to(block, (s[rows].size, t.size))
        _check_finite(block, s[rows], t, "kernel value")
        out[rows] = block @ quad.weights
    return out


def derivative_kernel_apply(
    problem: UrysohnProblem,
    s: np.ndarray,
    x_tau: np.ndarray,
    quad: KnotQuadrature,
    columns: Union[np.ndarray, scipy.sparse.spmatrix],
) -> np.ndarray:
    """(D @ columns) with D[a, q] = w_q dk/du(s_a, tau_q, x(tau_q)).

    `columns` holds functions sampled at the abscissae, one per column, so row
    a of the result is K'(x) applied to each column function at s_a.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = quad.points
    sparse = scipy.sparse.issparse(columns)
    width = columns.shape[1] if np.ndim(columns) == 2 else 1
    out = np.empty((s.size, width))
    for rows in _row_chunks(s.size, t.size):
        block = problem.kernel_du(s[rows, None], t[None, :], x_tau[None, :])
        block = np.broadcast_to(block, (s[rows].size, t.size))
        _check_finite(block, s[rows], t, "kernel derivative")
        block = block * quad.weights[None, :]
        if sparse:
            out[rows] = np.asarray((columns.T @ block.T).T)
        else:
            out[rows] = (block @ columns).reshape(-1, width)
    return out


def kprime_basis_matrix(
    problem: UrysohnProblem,
    s: np.ndarray,
    x_tau: np.ndarray,
    quad: KnotQuadrature,
    basis_tau: scipy.sparse.spmatrix,
) -> np.ndarray:
    """M[a, j-1] = (K'(x) B_j)(s_a) for all basis functions at once."""
    return derivative_kernel_apply(problem, s, x_tau, quad, basis_tau)


def _as_result(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


def apply_K(
    problem: UrysohnProblem,
    x: Evaluable,
    s,
    rule: GaussRule,
    grid: UniformKnotGrid,
):
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(check_points(s))
    quad = knot_quadrature(grid.n, rule.m)
    return _as_result(integrate_kernel(problem, s, sample_function(x, quad.points), quad), scalar)


def apply_Kprime(
    problem: UrysohnProblem,
    x: Evaluable,
    hfun: Evaluable,
    s,
    rule: GaussRule,
    grid: UniformKnotGrid,
):
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(check_points(s))
    quad = knot_quadrature(grid.n, rule.m)
    h_tau = sample_function(hfun, quad.points)
    values = derivative_kernel_apply(problem, s, sample_function(x, quad.points), quad, h_tau)
    return _as_result(values[:, 0], scalar)


def kprime_on_basis(
    problem: UrysohnProblem,
    x: Evaluable,
    space: SplineSpace,
    j: int,
    s,
    rule: GaussRule,
):
    """(K'(x) B_j)(s), integrating over the cells of supp(B_j) only."""
    if not 1 <= j <= space.dimension:
        raise ParameterError(f"basis index {j} out of range 1..{space.dimension}")
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(check_points(s))
    quad = knot_quadrature(space.n, rule.m)
    cells = quad.cell_slice(*space.support_cells(j))
    t = quad.points[cells]
    b_j = space.basis_matrix(t)[:, j - 1].toarray().ravel()
    block = problem.kernel_du(s[:, None], t[None, :], sample_function(x, t)[None, :])
    block = np.broadcast_to(block, (s.size, t.size))
    _check_finite(block, s, t, "kernel derivative")
    return _as_result(block @ (quad.weights[cells] * b_j), scalar)
