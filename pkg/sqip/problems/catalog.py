# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""Benchmark Urysohn problems with known solutions, addressable by id."""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np

from sqip.integration.operator import UrysohnProblem
from sqip.lib.errors import ParameterError
from sqip.solvers.newton import SeedPolicy

logger = logging.getLogger(__name__)

# c below this is treated as an ill-behaved instance of test2
ILL_BEHAVED_C = 0.5


@dataclass(frozen=True)
class ProblemCatalogEntry:
    id: str
    problem: UrysohnProblem
    parameters: Dict[str, float] = field(default_factory=dict)
    ill_behaved: bool = False

    @property
    def seed_policy(self) -> SeedPolicy:
        return SeedPolicy.EXACT_SEED if self.ill_behaved else SeedPolicy.PROJECT_RHS

    @property
    def damping(self) -> bool:
        return self.ill_behaved


_PROBLEMS: Dict[str, Callable[..., ProblemCatalogEntry]] = {}


def register_problem(name: str):
    def wrapper(factory):
        if name in _PROBLEMS:
            raise KeyError(f"problem {name!r} registered twice")
        _PROBLEMS[name] = factory
        return factory

    return wrapper


def problem_ids():
    return sorted(_PROBLEMS)


def make_problem(name: str, check: bool = True, **parameters) -> ProblemCatalogEntry:
    """Build a catalog entry and run the problem's self-consistency gate."""
    if name not in _PROBLEMS:
        raise ParameterError(f"unknown problem {name!r}; expected one of {problem_ids()}")
    try:
        entry = _PROBLEMS[name](**parameters)
    except TypeError as e:
        raise ParameterError(f"bad parameters for {name}: {e}")
    if check:
        entry.problem.check_consistency()
    return entry


def make_test1() -> UrysohnProblem:
    """k(s, t, u) = cos(11 pi s) sin(11 pi t) u^2 with solution cos(11 pi s)."""
    w = 11.0 * np.pi

    def kernel(s, t, u):
        return np.cos(w * s) * np.sin(w * t) * u * u

    def kernel_du(s, t, u):
        return 2.0 * np.cos(w * s) * np.sin(w * t) * u

    def rhs(s):
        return (1.0 - 2.0 / (33.0 * np.pi)) * np.cos(w * s)

    def exact(s):
        return np.cos(w * s)

    return UrysohnProblem(
        label="test1",
        kernel=kernel,
        kernel_du=kernel_du,
        rhs=rhs,
        exact_solution=exact,
    )


def closed_form_integral(s, c: float) -> np.ndarray:
    """int_0^1 (t + c) / ((t + c)(t + s) + 1) dt in closed form."""
    s = np.asarray(s, dtype=float)
    B = c + s
    C = c * s + 1.0
    root = np.sqrt(4.0 * C - B * B)
    return 0.5 * np.log((1.0 + B + C) / C) + (c - 0.5 * B) * (2.0 / root) * (
        np.arctan((2.0 + B) / root) - np.arctan(B / root)
    )


def make_test2(c: float = 1.0) -> UrysohnProblem:
    """k(s, t, u) = 1 / (s + t + u) with solution 1 / (t + c)."""
    if not c > 0:
        raise ParameterError(f"test2 needs c > 0, got {c!r}")
    c = float(c)
    s_grid = np.linspace(0.0, 1.0, 101)
    if np.min(4.0 * (c * s_grid + 1.0) - (c + s_grid) ** 2) <= 0:
        raise ParameterError(f"closed form for the test2 right hand side is invalid at c={c}")

    def kernel(s, t, u):
        return 1.0 / (s + t + u)

    def kernel_du(s, t, u):
        v = s + t + u
        return -1.0 / (v * v)

    def rhs(s):
        return 1.0 / (s + c) - closed_form_integral(s, c)

    def exact(s):
        return 1.0 / (np.asarray(s, dtype=float) + c)

    return UrysohnProblem(
        label=f"test2(c={c:g})",
        kernel=kernel,
        kernel_du=kernel_du,
        rhs=rhs,
        exact_solution=exact,
    )


@register_problem("test1")
def _test1_entry() -> ProblemCatalogEntry:
    return ProblemCatalogEntry(id="test1", problem=make_test1())


@register_problem("test2")
def _test2_entry(c: float = 1.0) -> ProblemCatalogEntry:
    return ProblemCatalogEntry(
        id="test2",
        problem=make_test2(c),
        parameters={"c": float(c)},
        ill_behaved=float(c) < ILL_BEHAVED_C,
    )
