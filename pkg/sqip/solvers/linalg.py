# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import logging

import numpy as np
import scipy.linalg

from sqip.lib.errors import ParameterError, SingularSystemError

logger = logging.getLogger(__name__)

PIVOT_THRESHOLD = 1e-300


def dense_solve(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve M x = b by LU with partial pivoting."""
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {M.shape}")
    if b.shape[0] != M.shape[0]:
        raise ParameterError(
            f"right hand side has {b.shape[0]} rows, matrix has {M.shape[0]}"
        )
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(b))):
        raise ParameterError("linear system has non-finite entries")
    scale = max(float(np.max(np.abs(M))) if M.size else 0.0, 1.0)
    lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.size and pivots.min() <= PIVOT_THRESHOLD * scale:
        k = int(np.argmin(pivots))
        raise SingularSystemError(
            f"pivot {k} is {pivots[k]:.3e} (matrix scale {scale:.3e})"
        )
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
