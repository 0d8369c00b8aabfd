# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""Spline quasi-interpolating projectors built from point-value functionals.

A scheme holds one functional per basis function,

    lambda_i(x) = sum_k sigma_{i,k} x(xi_k),

with nodes xi_k = k / (2n) (knots at even k, cell midpoints at odd k) taken
from supp(B_i). Weights satisfy lambda_i(B_j) = delta_ij, so that
pi_n x = sum_i lambda_i(x) B_i is a projector onto the spline space.
"""

import dataclasses
import enum
import functools
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd
import scipy.linalg
import scipy.sparse

from sqip.lib.errors import ConstructionError, ParameterError
from sqip.splines.bspline import Spline, SplineSpace, UniformKnotGrid

logger = logging.getLogger(__name__)

CONSISTENCY_TOL = 1e-10
# relative singular value cutoff; the symmetric systems have one redundant row
RANK_TOL = 1e-10
NORM_SAMPLES = 1000


@dataclass(frozen=True)
class QiNodeSet:
    """Nodes xi_0..xi_{2n}: xi_{2i} = t_i, xi_{2i-1} = s_i."""

    grid: UniformKnotGrid

    @functools.cached_property
    def values(self) -> np.ndarray:
        values = np.arange(2 * self.grid.n + 1) / (2 * self.grid.n)
        values.setflags(write=False)
        return values

    def __len__(self) -> int:
        return 2 * self.grid.n + 1

    def sample(self, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Values of `fn` at every node."""
        return np.asarray(fn(self.values), dtype=float).reshape(len(self))


def qi_nodes(grid: UniformKnotGrid) -> QiNodeSet:
    return QiNodeSet(grid)


class StencilPolicy(enum.Enum):
    # every QI node in supp(B_i)
    FULL = enum.auto()
    # smallest window of consecutive nodes with a solvable constraint system
    MINIMAL = enum.auto()


class QipVariant(enum.Enum):
    Q1 = (1, StencilPolicy.MINIMAL)
    Q2 = (2, StencilPolicy.FULL)
    Q2dB = (2, StencilPolicy.MINIMAL)
    Q3 = (3, StencilPolicy.FULL)

    @property
    def degree(self) -> int:
        return self.value[0]

    @property
    def policy(self) -> StencilPolicy:
        return self.value[1]

    @classmethod
    def parse(cls, name: str) -> "QipVariant":
        for variant in cls:
            if variant.name.lower() == str(name).strip().lower():
                return variant
        raise ParameterError(
            f"unknown variant {name!r}; expected one of {[v.name for v in cls]}"
        )


@dataclass(frozen=True)
class Stencil:
    """Functional lambda_index as node indices into the QiNodeSet and weights."""

    index: int
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)

    def shifted(self, index: int, offset: int) -> "Stencil":
        return Stencil(index=index, nodes=self.nodes + offset, weights=self.weights.copy())

    def mirrored(self, index: int, last_node: int) -> "Stencil":
        return Stencil(
            index=index,
            nodes=(last_node - self.nodes)[::-1].copy(),
            weights=self.weights[::-1].copy(),
        )


@dataclass(frozen=True, eq=False)
class QipScheme:
    space: SplineSpace
    node_set: QiNodeSet
    variant: QipVariant
    stencils: Tuple[Stencil, ...]

    @property
    def n(self) -> int:
        return self.space.n

    def stencil(self, i: int) -> Stencil:
        """Stencil of lambda_i, 1 <= i <= N."""
        if not 1 <= i <= len(self.stencils):
            raise ParameterError(f"functional index {i} out of range 1..{len(self.stencils)}")
        return self.stencils[i - 1]

    @functools.cached_property
    def _functional_matrix(self) -> scipy.sparse.csr_matrix:
        rows = np.concatenate(
            [np.full(len(s), s.index - 1) for s in self.stencils]
        )
        cols = np.concatenate([s.nodes for s in self.stencils])
        data = np.concatenate([s.weights for s in self.stencils])
        return scipy.sparse.csr_matrix(
            (data, (rows, cols)), shape=(self.space.dimension, len(self.node_set))
        )

    def functional_matrix(self) -> scipy.sparse.csr_matrix:
        """Lambda as a sparse N x (2n+1) matrix: coefficients = Lambda @ samples."""
        return self._functional_matrix

    def perturbed(self, i: int, position: int, delta: float) -> "QipScheme":
        """Copy of this scheme with weight `position` of lambda_i shifted by delta."""
        stencil = self.stencil(i)
        if not 0 <= position < len(stencil):
            raise ParameterError(
                f"stencil position {position} out of range for functional {i}"
            )
        weights = stencil.weights.copy()
        weights[position] += delta
        stencils = list(self.stencils)
        stencils[i - 1] = dataclasses.replace(stencil, weights=weights)
        return dataclasses.replace(self, stencils=tuple(stencils))


def _node_matrix(space: SplineSpace, node_set: QiNodeSet) -> np.ndarray:
    # M[k, j-1] = B_j(xi_k)
    return space.basis_matrix(node_set.values).toarray()


def _solve_weights(
    node_matrix: np.ndarray, i: int, nodes: np.ndarray, symmetric: bool
) -> Optional[np.ndarray]:
    """Minimal-norm weights on `nodes` with lambda_i(B_j) = delta_ij, or None."""
    sub = node_matrix[nodes, :]
    active = np.flatnonzero(np.any(sub != 0.0, axis=0))
    active = np.union1d(active, [i - 1])
    system = sub[:, active].T
    rhs = (active == i - 1).astype(float)
    if symmetric:
        m = len(nodes)
        pairs = [(k, m - 1 - k) for k in range(m // 2)]
        if pairs:
            mirror = np.zeros((len(pairs), m))
            for row, (k, l) in enumerate(pairs):
                mirror[row, k] = 1.0
                mirror[row, l] = -1.0
            system = np.vstack((system, mirror))
            rhs = np.concatenate((rhs, np.zeros(len(pairs))))
    weights, _, _, _ = scipy.linalg.lstsq(system, rhs, cond=RANK_TOL)
    if np.max(np.abs(system @ weights - rhs)) > CONSISTENCY_TOL:
        return None
    if symmetric:
        weights = 0.5 * (weights + weights[::-1])
    return weights


def _candidate_windows(
    first: int, last: int, policy: StencilPolicy, symmetric: bool
) -> Iterable[np.ndarray]:
    if policy == StencilPolicy.FULL:
        yield np.arange(first, last + 1)
        return
    center = 0.5 * (first + last)
    for size in range(1, last - first + 2):
        starts = range(first, last - size + 2)
        if symmetric:
            starts = [a for a in starts if a + (size - 1) / 2 == center]
        # closest to the support center first, then leftmost
        for a in sorted(starts, key=lambda a: (abs(a + (size - 1) / 2 - center), a)):
            yield np.arange(a, a + size)


def _build_stencil(
    space: SplineSpace, node_matrix: np.ndarray, i: int, policy: StencilPolicy
) -> Stencil:
    first_cell, last_cell = space.support_cells(i)
    symmetric = space.degree + 1 <= i <= space.n
    for nodes in _candidate_windows(2 * first_cell, 2 * last_cell, policy, symmetric):
        weights = _solve_weights(node_matrix, i, nodes, symmetric)
        if weights is not None:
            return Stencil(index=i, nodes=nodes, weights=weights)
    raise ConstructionError(i, "constraint system is inconsistent on every admissible stencil")


def build_qip(space: SplineSpace, variant: QipVariant) -> QipScheme:
    if space.degree != variant.degree:
        raise ParameterError(
            f"variant {variant.name} needs degree {variant.degree}, space has degree {space.degree}"
        )
    node_set = qi_nodes(space.grid)
    node_matrix = _node_matrix(space, node_set)
    N = space.dimension
    last_node = 2 * space.n
    stencils: List[Stencil] = []
    for i in range(1, space.degree + 1):
        stencils.append(_build_stencil(space, node_matrix, i, variant.policy))
    # interior functionals are translates of lambda_{d+1} on the uniform grid
    first = _build_stencil(space, node_matrix, space.degree + 1, variant.policy)
    for i in range(space.degree + 1, space.n + 1):
        stencils.append(first.shifted(i, 2 * (i - first.index)))
    # right end functionals mirror the left end
    for i in range(space.n + 1, N + 1):
        stencils.append(stencils[N - i].mirrored(i, last_node))
    scheme = QipScheme(
        space=space, node_set=node_set, variant=variant, stencils=tuple(stencils)
    )
    defect = projector_defect(scheme)
    if defect > CONSISTENCY_TOL:
        rows = np.abs(_duality_matrix(scheme) - np.eye(N)).max(axis=1)
        raise ConstructionError(
            int(np.argmax(rows)) + 1, f"projector defect {defect:.3e}"
        )
    logger.debug(
        "Built %s scheme: n=%d, stencil sizes %s, projector defect %.3e",
        variant.name,
        space.n,
        sorted({len(s) for s in stencils}),
        defect,
    )
    return scheme


def apply_qip(scheme: QipScheme, samples) -> Spline:
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size != len(scheme.node_set):
        raise ParameterError(
            f"expected {len(scheme.node_set)} node samples, got {samples.size}"
        )
    return Spline(scheme.space, scheme.functional_matrix() @ samples)


def _duality_matrix(scheme: QipScheme) -> np.ndarray:
    # D[i-1, j-1] = lambda_i(B_j)
    return np.asarray(
        scheme.functional_matrix() @ _node_matrix(scheme.space, scheme.node_set)
    )


def projector_defect(scheme: QipScheme) -> float:
    """max_{i,j} |lambda_i(B_j) - delta_ij|."""
    duality = _duality_matrix(scheme)
    return float(np.max(np.abs(duality - np.eye(scheme.space.dimension))))


def norm_estimate(scheme: QipScheme, samples: int = NORM_SAMPLES) -> float:
    """max over sample points of the Lebesgue function sum_k |sum_i sigma_{i,k} B_i(t)|."""
    t = np.linspace(0.0, 1.0, samples)
    lebesgue = scheme.space.basis_matrix(t) @ scheme.functional_matrix()
    return float(np.max(np.asarray(abs(lebesgue).sum(axis=1))))


def dump_stencils(scheme: QipScheme) -> pd.DataFrame:
    """Stencils in long form: columns i, node_index, xi_value, sigma."""
    xi = scheme.node_set.values
    return pd.DataFrame(
        [
            {"i": s.index, "node_index": int(k), "xi_value": xi[k], "sigma": w}
            for s in scheme.stencils
            for k, w in zip(s.nodes, s.weights)
        ],
        columns=["i", "node_index", "xi_value", "sigma"],
    )
