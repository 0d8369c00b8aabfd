# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""Collocation: find zeta in the spline space with zeta - pi_n K(zeta) = pi_n f."""

import logging
import time
from typing import Tuple

import numpy as np

from sqip.integration.operator import (
    UrysohnProblem,
    integrate_kernel,
    kprime_basis_matrix,
)
from sqip.integration.quadrature import GaussRule
from sqip.solvers.discretization import (
    Discretization,
    check_assembled,
    check_space,
    discretize,
)
from sqip.solvers.linalg import dense_solve
from sqip.solvers.newton import (
    Method,
    NewtonConfig,
    SolveResult,
    initial_coefficients,
    newton_iterate,
)
from sqip.splines.bspline import Spline, SplineSpace
from sqip.splines.quasi_interp import QipScheme

logger = logging.getLogger(__name__)


def _collocation_system(
    problem: UrysohnProblem, disc: Discretization, y: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    zeta_tau = disc.basis_tau @ y
    f_xi = disc.scheme.node_set.sample(problem.rhs)
    k_xi = integrate_kernel(problem, disc.xi, zeta_tau, disc.quad)
    C = disc.project(kprime_basis_matrix(problem, disc.xi, zeta_tau, disc.quad, disc.basis_tau))
    check_assembled("collocation matrix entry", C)
    r = disc.project(k_xi + f_xi) - C @ y
    check_assembled("collocation right hand side", r)
    return C, r


def collocation_residual(
    problem: UrysohnProblem, disc: Discretization, y: np.ndarray
) -> np.ndarray:
    """y - Lambda(K(zeta) + f) at the QI nodes."""
    zeta_tau = disc.basis_tau @ y
    k_xi = integrate_kernel(problem, disc.xi, zeta_tau, disc.quad)
    return y - disc.project(k_xi + disc.scheme.node_set.sample(problem.rhs))


def assemble_collocation(
    problem: UrysohnProblem,
    space: SplineSpace,
    scheme: QipScheme,
    zeta: Spline,
    rule: GaussRule,
) -> Tuple[np.ndarray, np.ndarray]:
    """C(i, j) = lambda_i(K'(zeta) B_j) and r = Lambda(K(zeta) + f) - C y."""
    check_space(space, scheme)
    return _collocation_system(problem, discretize(scheme, rule), zeta.coefficients)


def solve_collocation(
    problem: UrysohnProblem,
    space: SplineSpace,
    scheme: QipScheme,
    cfg: NewtonConfig,
    rule: GaussRule,
) -> SolveResult:
    check_space(space, scheme)
    disc = discretize(scheme, rule)
    identity = np.eye(disc.dimension)

    def step(y):
        C, r = _collocation_system(problem, disc, y)
        return dense_solve(identity - C, r)

    def residual(y):
        return float(np.max(np.abs(collocation_residual(problem, disc, y))))

    label = f"collocation[{scheme.variant.name}, n={space.n}]"
    start = time.time()
    y, history = newton_iterate(
        step, residual, initial_coefficients(problem, disc, cfg), cfg, label
    )
    result = SolveResult(
        coefficients=y,
        iterations=len(history),
        increment_history=history,
        residual=residual(y),
        method=Method.COLLOCATION,
        wall_time=time.time() - start,
    )
    logger.info(
        "%s: converged in %d iterations, residual %.3e",
        label,
        result.iterations,
        result.residual,
    )
    return result
