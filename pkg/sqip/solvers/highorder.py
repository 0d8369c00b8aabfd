# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""Modified projection method of high order.

The unknown is psi = pi_n phi_H in the spline space, and the approximant is

    phi_H = psi + (I - pi_n)(K(psi) + f),

so psi solves psi = pi_n (K(phi_H) + f). Newton works on the coefficients of
psi, and every step first samples the corrected iterate phi_H at the QI nodes
and at the quadrature abscissae.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from sqip.integration.operator import (
    UrysohnProblem,
    derivative_kernel_apply,
    integrate_kernel,
    kprime_basis_matrix,
    sample_function,
)
from sqip.integration.quadrature import GaussRule, KnotQuadrature
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
from sqip.splines.bspline import Spline, SplineSpace, check_points
from sqip.splines.quasi_interp import QipScheme, apply_qip

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _Corrected:
    """psi and phi_H for one coefficient vector, sampled where assembly needs them."""

    psi_tau: np.ndarray
    phi_tau: np.ndarray


def _corrected_iterate(
    problem: UrysohnProblem, disc: Discretization, x: np.ndarray
) -> _Corrected:
    psi_tau = disc.basis_tau @ x
    g_xi = integrate_kernel(problem, disc.xi, psi_tau, disc.quad)
    g_xi += sample_function(problem.rhs, disc.xi)
    g_tau = integrate_kernel(problem, disc.tau, psi_tau, disc.quad)
    g_tau += sample_function(problem.rhs, disc.tau)
    projected = disc.project(g_xi)
    return _Corrected(
        psi_tau=psi_tau,
        phi_tau=psi_tau + g_tau - disc.basis_tau @ projected,
    )


def _highorder_system(
    problem: UrysohnProblem, disc: Discretization, x: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    it = _corrected_iterate(problem, disc, x)
    quad = disc.quad
    A = disc.project(kprime_basis_matrix(problem, disc.xi, it.phi_tau, quad, disc.basis_tau))
    check_assembled("A matrix entry", A)

    # columns j of w_j = K'(psi) B_j, then v_j = (I - pi_n) w_j, at the abscissae
    w_tau = kprime_basis_matrix(problem, disc.tau, it.psi_tau, quad, disc.basis_tau)
    w_xi = kprime_basis_matrix(problem, disc.xi, it.psi_tau, quad, disc.basis_tau)
    v_tau = w_tau - disc.basis_tau @ disc.project(w_xi)
    B = disc.project(derivative_kernel_apply(problem, disc.xi, it.phi_tau, quad, v_tau))
    check_assembled("B matrix entry", B)

    k_phi = integrate_kernel(problem, disc.xi, it.phi_tau, quad)
    d = disc.project(k_phi + disc.scheme.node_set.sample(problem.rhs)) - A @ x - B @ x
    check_assembled("high-order right hand side", d)
    return A, B, d


def highorder_residual(
    problem: UrysohnProblem, disc: Discretization, x: np.ndarray
) -> np.ndarray:
    """x - Lambda(K(phi_H) + f) at the QI nodes."""
    it = _corrected_iterate(problem, disc, x)
    k_phi = integrate_kernel(problem, disc.xi, it.phi_tau, disc.quad)
    return x - disc.project(k_phi + disc.scheme.node_set.sample(problem.rhs))


@dataclass(frozen=True, eq=False)
class HighOrderApproximant:
    """phi_H(s) = psi(s) + K(psi)(s) + f(s) - (pi_n (K(psi) + f))(s)."""

    psi: Spline
    problem: UrysohnProblem
    scheme: QipScheme
    quad: KnotQuadrature
    _psi_tau: np.ndarray = field(init=False, repr=False)
    _projected_g: Spline = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_psi_tau", self.psi(self.quad.points))
        g_xi = self._g(self.scheme.node_set.values)
        object.__setattr__(self, "_projected_g", apply_qip(self.scheme, g_xi))

    def _g(self, s: np.ndarray) -> np.ndarray:
        return integrate_kernel(
            self.problem, s, self._psi_tau, self.quad
        ) + sample_function(self.problem.rhs, s)

    def correction(self, s) -> np.ndarray:
        """(I - pi_n)(K(psi) + f) at s."""
        s = np.atleast_1d(check_points(s))
        return self._g(s) - self._projected_g(s)

    def __call__(self, s):
        scalar = np.ndim(s) == 0
        s = np.atleast_1d(check_points(s))
        values = self.psi(s) + self.correction(s)
        return float(values[0]) if scalar else values


def assemble_highorder(
    problem: UrysohnProblem,
    space: SplineSpace,
    scheme: QipScheme,
    psi: Spline,
    rule: GaussRule,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """A(i, j) = lambda_i(K'(phi) B_j), B(i, j) = lambda_i(K'(phi)(I - pi_n)K'(psi) B_j)
    and d = Lambda(K(phi) + f) - A x - B x, phi the corrected iterate of psi."""
    check_space(space, scheme)
    return _highorder_system(problem, discretize(scheme, rule), psi.coefficients)


def solve_highorder(
    problem: UrysohnProblem,
    space: SplineSpace,
    scheme: QipScheme,
    cfg: NewtonConfig,
    rule: GaussRule,
) -> Tuple[SolveResult, HighOrderApproximant]:
    check_space(space, scheme)
    disc = discretize(scheme, rule)
    identity = np.eye(disc.dimension)

    def step(x):
        A, B, d = _highorder_system(problem, disc, x)
        return dense_solve(identity - A - B, d)

    def residual(x):
        return float(np.max(np.abs(highorder_residual(problem, disc, x))))

    label = f"highorder[{scheme.variant.name}, n={space.n}]"
    start = time.time()
    x, history = newton_iterate(
        step, residual, initial_coefficients(problem, disc, cfg), cfg, label
    )
    result = SolveResult(
        coefficients=x,
        iterations=len(history),
        increment_history=history,
        residual=residual(x),
        method=Method.HIGHORDER,
        wall_time=time.time() - start,
    )
    logger.info(
        "%s: converged in %d iterations, residual %.3e",
        label,
        result.iterations,
        result.residual,
    )
    approx = HighOrderApproximant(
        psi=Spline(space, x), problem=problem, scheme=scheme, quad=disc.quad
    )
    return result, approx


def eval_highorder(approx: HighOrderApproximant, s):
    return approx(s)
