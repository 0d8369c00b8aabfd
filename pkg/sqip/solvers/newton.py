# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""Newton-Kantorovich iteration shared by the collocation and high-order methods."""

import dataclasses
import enum
import logging
from typing import Callable, List, Optional

import numpy as np

from sqip.integration.operator import UrysohnProblem
from sqip.lib.errors import DivergenceError, ParameterError
from sqip.solvers.discretization import Discretization

logger = logging.getLogger(__name__)

# An increment that stopped shrinking below this relative size is rounding noise.
STAGNATION_FLOOR = 1e-11
MAX_HALVINGS = 10
# accepted discrete residual, in units of tol * (1 + max|x|)
RESIDUAL_FACTOR = 100.0


class Method(enum.Enum):
    COLLOCATION = "collocation"
    HIGHORDER = "highorder"


class SeedPolicy(enum.Enum):
    # lambda_i(f)
    PROJECT_RHS = "project_rhs"
    # lambda_i(phi), needs the exact solution
    EXACT_SEED = "exact_seed"
    CUSTOM = "custom"


@dataclasses.dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-14
    max_iter: int = 50
    seed: SeedPolicy = SeedPolicy.PROJECT_RHS
    custom_seed: Optional[np.ndarray] = dataclasses.field(default=None, compare=False)
    # halve the step while the discrete residual grows
    damping: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ParameterError(f"tol must be positive, got {self.tol!r}")
        if not isinstance(self.max_iter, (int, np.integer)) or self.max_iter < 1:
            raise ParameterError(f"max_iter must be an integer >= 1, got {self.max_iter!r}")
        if self.seed == SeedPolicy.CUSTOM and self.custom_seed is None:
            raise ParameterError("custom seed policy needs a coefficient vector")


@dataclasses.dataclass
class SolveResult:
    coefficients: np.ndarray
    iterations: int
    increment_history: List[float]
    residual: float
    method: Method
    wall_time: float = 0.0


def initial_coefficients(
    problem: UrysohnProblem, disc: Discretization, cfg: NewtonConfig
) -> np.ndarray:
    if cfg.seed == SeedPolicy.CUSTOM:
        seed = np.asarray(cfg.custom_seed, dtype=float).ravel()
        if seed.size != disc.dimension:
            raise ParameterError(
                f"custom seed has {seed.size} coefficients, expected {disc.dimension}"
            )
        return seed.copy()
    if cfg.seed == SeedPolicy.EXACT_SEED:
        if problem.exact_solution is None:
            raise ParameterError(f"{problem.label} has no exact solution to seed from")
        fn = problem.exact_solution
    else:
        fn = problem.rhs
    return disc.project(disc.scheme.node_set.sample(fn))


def newton_iterate(
    step: Callable[[np.ndarray], np.ndarray],
    residual: Callable[[np.ndarray], float],
    x0: np.ndarray,
    cfg: NewtonConfig,
    label: str,
):
    """Run x <- step(x) until the increment meets the tolerance.

    Returns (x, history). Raises DivergenceError after cfg.max_iter steps.
    """
    x = np.asarray(x0, dtype=float)
    history: List[float] = []
    current = residual(x) if cfg.damping else None
    for k in range(1, cfg.max_iter + 1):
        delta = step(x) - x
        if cfg.damping:
            scale = 1.0
            trial = residual(x + delta)
            halvings = 0
            while trial > current and halvings < MAX_HALVINGS:
                scale *= 0.5
                halvings += 1
                trial = residual(x + scale * delta)
            if halvings:
                logger.info("%s: step %d damped by 2^-%d", label, k, halvings)
            delta = scale * delta
            current = trial
        x = x + delta
        increment = float(np.max(np.abs(delta)))
        history.append(increment)
        size = 1.0 + float(np.max(np.abs(x)))
        logger.info("%s: iteration %d, increment %.3e", label, k, increment)
        if increment <= cfg.tol * size:
            return x, history
        if (
            k >= 2
            and increment <= STAGNATION_FLOOR * size
            and increment >= 0.5 * history[-2]
        ):
            final = residual(x)
            if final <= RESIDUAL_FACTOR * cfg.tol * size:
                logger.debug("%s: increment stagnated at %.3e", label, increment)
                return x, history
            logger.debug(
                "%s: increment stagnated at %.3e but residual is %.3e", label, increment, final
            )
    raise DivergenceError(
        f"{label}: no convergence in {cfg.max_iter} iterations "
        f"(last increment {history[-1]:.3e})",
        history,
    )
