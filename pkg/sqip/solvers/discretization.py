# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""Data shared by every Newton step for one (scheme, quadrature rule) pair."""

import functools
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from sqip.integration.operator import knot_quadrature
from sqip.integration.quadrature import GaussRule, KnotQuadrature
from sqip.lib.errors import AssemblyError, ParameterError
from sqip.splines.bspline import SplineSpace
from sqip.splines.quasi_interp import QipScheme


@dataclass(frozen=True, eq=False)
class Discretization:
    scheme: QipScheme
    quad: KnotQuadrature
    # Lambda: N x (2n+1)
    functionals: scipy.sparse.csr_matrix
    # B_j at the QI nodes: (2n+1) x N
    basis_xi: scipy.sparse.csr_matrix
    # B_j at the quadrature abscissae: Q x N
    basis_tau: scipy.sparse.csr_matrix

    @property
    def space(self) -> SplineSpace:
        return self.scheme.space

    @property
    def xi(self) -> np.ndarray:
        return self.scheme.node_set.values

    @property
    def tau(self) -> np.ndarray:
        return self.quad.points

    @property
    def dimension(self) -> int:
        return self.space.dimension

    def project(self, node_values: np.ndarray) -> np.ndarray:
        """Coefficients lambda_i of functions sampled at the QI nodes, column-wise."""
        return np.asarray(self.functionals @ node_values)


def check_space(space: SplineSpace, scheme: QipScheme):
    if scheme.space != space:
        raise ParameterError(
            f"scheme was built for degree {scheme.space.degree}, n={scheme.n}; "
            f"got degree {space.degree}, n={space.n}"
        )


@functools.lru_cache(maxsize=16)
def discretize(scheme: QipScheme, rule: GaussRule) -> Discretization:
    space = scheme.space
    quad = knot_quadrature(space.n, rule.m)
    return Discretization(
        scheme=scheme,
        quad=quad,
        functionals=scheme.functional_matrix(),
        basis_xi=space.basis_matrix(scheme.node_set.values),
        basis_tau=space.basis_matrix(quad.points),
    )


def check_assembled(name: str, values: np.ndarray):
    """Raise AssemblyError at the first non-finite entry, 1-based."""
    if np.all(np.isfinite(values)):
        return
    bad = np.argwhere(~np.isfinite(values))[0]
    if bad.size == 1:
        raise AssemblyError(f"non-finite {name}", int(bad[0]) + 1)
    raise AssemblyError(f"non-finite {name}", int(bad[0]) + 1, int(bad[1]) + 1)
